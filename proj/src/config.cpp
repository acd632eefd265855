#include "ospkit/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ospkit/errors.hpp"

namespace ospkit::config {
namespace {

using nlohmann::json;

// Collects every violation so a single error can report all of them.
class Reader {
public:
    std::vector<std::string> problems;

    void problem(const std::string& where, const std::string& what) { problems.push_back(where + ": " + what); }

    const json* child(const json& obj, const char* key, const std::string& where, bool required = true) {
        if (!obj.is_object()) {
            problem(where, "expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) problem(where + "." + key, "missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& where, bool required = true) {
        const json* v = child(obj, key, where, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            problem(where + "." + key, "expected a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& where) {
        if (!v.is_array()) {
            problem(where, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                problem(where + "[" + std::to_string(i) + "]", "expected a number");
                return std::nullopt;
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::optional<Matrix> matrix(const json& obj, const char* key, const std::string& where) {
        const json* v = child(obj, key, where);
        if (!v) return std::nullopt;
        const std::string at = where + "." + key;
        if (!v->is_array() || v->empty()) {
            problem(at, "expected a non-empty array of rows");
            return std::nullopt;
        }
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < v->size(); ++i) {
            auto row = numbers((*v)[i], at + "[" + std::to_string(i) + "]");
            if (!row) return std::nullopt;
            if (!rows.empty() && row->size() != rows.front().size()) {
                problem(at + "[" + std::to_string(i) + "]", "row has " + std::to_string(row->size()) +
                                                                " columns, row 0 has " +
                                                                std::to_string(rows.front().size()));
                return std::nullopt;
            }
            rows.push_back(std::move(*row));
        }
        if (rows.front().empty()) {
            problem(at, "rows must not be empty");
            return std::nullopt;
        }
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < rows[i].size(); ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            }
        }
        if (!m.allFinite()) problem(at, "entries must be finite");
        return m;
    }

    std::vector<sim::UniformRange> ranges(const json& obj, const char* key, const std::string& where) {
        std::vector<sim::UniformRange> out;
        const json* v = child(obj, key, where);
        if (!v) return out;
        const std::string at = where + "." + key;
        if (!v->is_array()) {
            problem(at, "expected an array of {\"lo\", \"hi\"} objects");
            return out;
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            const std::string item = at + "[" + std::to_string(i) + "]";
            auto lo = number((*v)[i], "lo", item);
            auto hi = number((*v)[i], "hi", item);
            if (!lo || !hi) continue;
            if (!(*lo > 0.0) || !(*lo <= *hi) || !std::isfinite(*hi)) {
                problem(item, "airtime range must satisfy 0 < lo <= hi");
            }
            out.push_back({*lo, *hi});
        }
        return out;
    }
};

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

struct ModelParts {
    std::optional<Matrix> a, b, c, q, r;
    std::optional<double> period;
    std::optional<std::vector<double>> periods;
    Eigen::Index s = -1;
    Eigen::Index n = -1;

    std::optional<SystemModel> build(Reader& rd) const {
        if (!rd.problems.empty()) return std::nullopt;
        try {
            return SystemModel(*a, *b, *c, *q, *r, *period, *periods);
        } catch (const Error& e) {
            rd.problem("model", e.what());
        }
        return std::nullopt;
    }
};

ModelParts read_model(Reader& rd, const json& doc) {
    ModelParts parts;
    auto& [a, b, c, q, r, period, periods, s_out, n_out] = parts;
    if (const json* m = rd.child(doc, "model", "config")) {
        a = rd.matrix(*m, "A", "model");
        b = rd.matrix(*m, "B", "model");
        c = rd.matrix(*m, "C", "model");
        q = rd.matrix(*m, "Q", "model");
        r = rd.matrix(*m, "R", "model");
        period = rd.number(*m, "T", "model");
        if (const json* p = rd.child(*m, "observer_periods", "model")) periods = rd.numbers(*p, "model.observer_periods");
    }
    if (a && a->rows() != a->cols()) rd.problem("model.A", "must be square, got " + shape(*a));
    const Eigen::Index s = a ? a->rows() : -1;
    const Eigen::Index n = periods ? static_cast<Eigen::Index>(periods->size()) : -1;
    s_out = s;
    n_out = n;
    if (a && b && b->rows() != s) rd.problem("model.B", "must have " + std::to_string(s) + " rows, got " + shape(*b));
    if (c && s >= 0 && c->cols() != s) {
        rd.problem("model.C", "must have " + std::to_string(s) + " columns (one per state), got " + shape(*c));
    }
    if (c && n >= 0 && c->rows() != n) {
        rd.problem("model.C", "must have " + std::to_string(n) + " rows (one per observer period), got " + shape(*c));
    }
    if (q && s >= 0 && (q->rows() != s || q->cols() != s)) {
        rd.problem("model.Q", "must be " + std::to_string(s) + "x" + std::to_string(s) + ", got " + shape(*q));
    }
    if (r && n >= 0 && (r->rows() != n || r->cols() != n)) {
        rd.problem("model.R", "must be " + std::to_string(n) + "x" + std::to_string(n) + ", got " + shape(*r));
    }
    if (r) {
        for (Eigen::Index i = 0; i < r->rows(); ++i) {
            for (Eigen::Index j = 0; j < r->cols(); ++j) {
                if (i != j && (*r)(i, j) != 0.0) {
                    rd.problem("model.R", "must be diagonal (observations are fused one scalar at a time); entry [" +
                                              std::to_string(i) + "][" + std::to_string(j) + "] is non-zero");
                    i = r->rows();
                    break;
                }
            }
        }
        for (Eigen::Index i = 0; i < std::min(r->rows(), r->cols()); ++i) {
            if (!((*r)(i, i) > 0.0)) rd.problem("model.R", "diagonal entry " + std::to_string(i) + " must be > 0");
        }
    }
    if (period && !(*period > 0.0)) rd.problem("model.T", "must be > 0");
    if (periods) {
        for (std::size_t i = 0; i < periods->size(); ++i) {
            if (!((*periods)[i] > 0.0)) rd.problem("model.observer_periods[" + std::to_string(i) + "]", "must be > 0");
        }
    }

    return parts;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Configuration, std::string("config is not valid JSON: ") + e.what());
    }
    Reader rd;
    if (!doc.is_object()) {
        fail(ErrorKind::Configuration, "config: top level must be an object");
    }

    std::string preset;
    if (auto it = doc.find("preset"); it != doc.end()) {
        if (it->is_string()) preset = it->get<std::string>();
        else rd.problem("preset", "expected a string");
    }

    const ModelParts parts = read_model(rd, doc);
    const auto& b = parts.b;
    const Eigen::Index n = parts.n;

    // channel
    sim::ChannelConfig channel;
    std::optional<std::string> trace_path;
    std::size_t agents = 0;
    if (const json* ch = rd.child(doc, "channel", "config")) {
        if (const json* seed = rd.child(*ch, "seed", "channel")) {
            if (seed->is_number_unsigned()) channel.seed = seed->get<std::uint64_t>();
            else rd.problem("channel.seed", "expected a non-negative integer");
        }
        const bool has_trace = ch->contains("trace");
        const bool has_dist = ch->contains("observation_airtime") || ch->contains("action_airtime");
        if (has_trace == has_dist) {
            rd.problem("channel", "give exactly one of \"trace\" or the airtime distributions");
        } else if (has_trace) {
            const json& t = (*ch)["trace"];
            if (t.is_string()) trace_path = t.get<std::string>();
            else rd.problem("channel.trace", "expected a path string");
            if (const json* ag = rd.child(*ch, "agents", "channel")) {
                if (ag->is_number_unsigned()) agents = ag->get<std::size_t>();
                else rd.problem("channel.agents", "expected a non-negative integer");
            }
        } else {
            channel.observation = rd.ranges(*ch, "observation_airtime", "channel");
            channel.action = rd.ranges(*ch, "action_airtime", "channel");
            agents = channel.action.size();
            if (n >= 0 && static_cast<Eigen::Index>(channel.observation.size()) != n) {
                rd.problem("channel.observation_airtime", "needs one range per observer (" + std::to_string(n) +
                                                              "), got " + std::to_string(channel.observation.size()));
            }
        }
    }

    // run
    sim::Policy policy = sim::Policy::Bnb;
    long long cycles = 100;
    double cov_scale = 1.0;
    std::optional<Vector> input;
    if (const json* run = rd.child(doc, "run", "config", false)) {
        if (auto it = run->find("policy"); it != run->end()) {
            try {
                policy = sim::parse_policy(it->is_string() ? it->get<std::string>() : std::string("?"));
            } catch (const Error& e) {
                rd.problem("run.policy", e.what());
            }
        }
        if (auto it = run->find("cycles"); it != run->end()) {
            if (it->is_number_integer() && it->get<long long>() >= 1) cycles = it->get<long long>();
            else rd.problem("run.cycles", "expected an integer >= 1");
        }
        if (auto v = rd.number(*run, "initial_cov_scale", "run", false)) {
            if (*v > 0.0) cov_scale = *v;
            else rd.problem("run.initial_cov_scale", "must be > 0");
        }
        if (auto it = run->find("input"); it != run->end()) {
            if (auto u = rd.numbers(*it, "run.input")) {
                input = Eigen::Map<const Vector>(u->data(), static_cast<Eigen::Index>(u->size()));
                if (b && static_cast<Eigen::Index>(u->size()) != b->cols()) {
                    rd.problem("run.input", "must have " + std::to_string(b->cols()) + " entries (columns of B)");
                }
            }
        }
    }

    std::optional<std::string> csv;
    if (const json* out = rd.child(doc, "output", "config", false)) {
        if (auto it = out->find("csv"); it != out->end()) {
            if (it->is_string()) csv = it->get<std::string>();
            else rd.problem("output.csv", "expected a path string");
        }
    }

    std::optional<SystemModel> model = parts.build(rd);
    if (rd.problems.empty() && trace_path) {
        std::filesystem::path p(*trace_path);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        try {
            channel.trace = sim::AirtimeTrace::load(p, model->observer_count(), agents);
        } catch (const Error& e) {
            rd.problem("channel.trace", e.what());
        }
    }
    if (!rd.problems.empty()) {
        std::string msg = "invalid config (" + std::to_string(rd.problems.size()) + " problem" +
                          (rd.problems.size() == 1 ? "" : "s") + "):";
        for (const auto& p : rd.problems) msg += "\n  " + p;
        fail(ErrorKind::Configuration, msg);
    }
    return ExperimentConfig{preset, std::move(*model), std::move(channel), trace_path, agents, policy,
                            cycles, cov_scale, input, csv};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        fail(ErrorKind::Configuration, "cannot open config " + path.string());
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

CycleInstance parse_cycle(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::Configuration, std::string("cycle file is not valid JSON: ") + e.what());
    }
    Reader rd;
    if (!doc.is_object()) fail(ErrorKind::Configuration, "cycle file: top level must be an object");
    const ModelParts parts = read_model(rd, doc);

    double start = 0.0;
    double prior_time = 0.0;
    std::optional<Matrix> prior_cov;
    double prior_scale = 1.0;
    std::vector<osp::Candidate> candidates;
    std::vector<double> actions;
    if (const json* cyc = rd.child(doc, "cycle", "config")) {
        start = rd.number(*cyc, "start", "cycle").value_or(0.0);
        prior_time = rd.number(*cyc, "prior_time", "cycle", false).value_or(start);
        if (cyc->contains("prior_cov")) {
            prior_cov = rd.matrix(*cyc, "prior_cov", "cycle");
        } else if (auto scale = rd.number(*cyc, "prior_cov_scale", "cycle", false)) {
            prior_scale = *scale;
        }
        if (const json* list = rd.child(*cyc, "candidates", "cycle")) {
            if (!list->is_array()) {
                rd.problem("cycle.candidates", "expected an array");
            } else {
                for (std::size_t i = 0; i < list->size(); ++i) {
                    const std::string at = "cycle.candidates[" + std::to_string(i) + "]";
                    const json& item = (*list)[i];
                    const json* obs = rd.child(item, "observer", at);
                    auto stamp = rd.number(item, "timestamp", at);
                    auto air = rd.number(item, "airtime", at);
                    if (obs && !obs->is_number_unsigned()) rd.problem(at + ".observer", "expected a non-negative integer");
                    if (obs && obs->is_number_unsigned() && stamp && air) {
                        const auto id = obs->get<std::size_t>();
                        if (parts.n >= 0 && static_cast<Eigen::Index>(id) >= parts.n) {
                            rd.problem(at + ".observer", "no such observer");
                        }
                        candidates.push_back({id, *stamp, *air});
                    }
                }
            }
        }
        if (const json* act = rd.child(*cyc, "action_airtimes", "cycle", false)) {
            if (auto v = rd.numbers(*act, "cycle.action_airtimes")) actions = *v;
        }
    }
    std::optional<SystemModel> model = parts.build(rd);
    if (!rd.problems.empty()) {
        std::string msg = "invalid cycle file:";
        for (const auto& p : rd.problems) msg += "\n  " + p;
        fail(ErrorKind::Configuration, msg);
    }
    const auto dim = static_cast<Eigen::Index>(model->state_dim());
    Matrix cov = prior_cov ? *prior_cov : Matrix(prior_scale * Matrix::Identity(dim, dim));
    try {
        osp::CycleContext ctx(std::move(candidates), std::move(actions), start, model->period(), prior_time,
                              std::move(cov));
        return CycleInstance{std::move(*model), std::move(ctx)};
    } catch (const Error& e) {
        fail(ErrorKind::Configuration, std::string("invalid cycle file: ") + e.what());
    }
}

CycleInstance load_cycle(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) fail(ErrorKind::Configuration, "cannot open cycle file " + path.string());
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_cycle(buffer.str());
}

std::string to_json(const ExperimentConfig& cfg) {
    json doc;
    if (!cfg.preset.empty()) doc["preset"] = cfg.preset;
    const auto& m = cfg.model;
    doc["model"] = {{"A", matrix_json(m.a())}, {"B", matrix_json(m.b())}, {"C", matrix_json(m.c())},
                    {"Q", matrix_json(m.q())}, {"R", matrix_json(m.r())}, {"T", m.period()},
                    {"observer_periods", m.observer_periods()}};
    json channel = {{"seed", cfg.channel.seed}};
    if (cfg.trace_path) {
        channel["trace"] = *cfg.trace_path;
        channel["agents"] = cfg.agents;
    } else {
        auto ranges = [](const std::vector<sim::UniformRange>& rs) {
            json arr = json::array();
            for (const auto& r : rs) arr.push_back({{"lo", r.lo}, {"hi", r.hi}});
            return arr;
        };
        channel["observation_airtime"] = ranges(cfg.channel.observation);
        channel["action_airtime"] = ranges(cfg.channel.action);
    }
    doc["channel"] = std::move(channel);
    json run = {{"policy", sim::to_string(cfg.policy)}, {"cycles", cfg.cycles},
                {"initial_cov_scale", cfg.initial_cov_scale}};
    if (cfg.constant_input) {
        run["input"] = std::vector<double>(cfg.constant_input->data(),
                                           cfg.constant_input->data() + cfg.constant_input->size());
    }
    doc["run"] = std::move(run);
    if (cfg.csv_path) doc["output"] = {{"csv", *cfg.csv_path}};
    return doc.dump(2) + "\n";
}

}  // namespace ospkit::config
