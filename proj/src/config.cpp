#include "nonstat_pm/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace nspm {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

struct RawEntry {
    std::string section, key, value;
    int line;
};

const std::set<std::string> kKnownKeys = {
    "experiment.kind",       "experiment.seed",      "experiment.grid_size",
    "experiment.M",          "experiment.N",         "experiment.beta_star",
    "experiment.threads",    "experiment.n_omega",   "experiment.i_burn",
    "experiment.K_max",      "experiment.t",         "experiment.n_quad",
    "schedule.kind",         "schedule.values",      "schedule.lo",
    "schedule.hi",           "schedule.states",      "schedule.transition",
    "schedule.tau",          "schedule.tau_a",       "schedule.tau_b",
    "schedule.eta",          "schedule.c_pert",
    "observable.name",
    "output.dir",
};

const std::set<std::string> kKnownSections = {"experiment", "schedule", "observable", "output"};

}  // namespace

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream os;
    for (const auto& d : diags) {
        if (d.line > 0) os << "line " << d.line << ": ";
        if (!d.field.empty()) os << d.field << ": ";
        os << d.message << "\n";
    }
    return os.str();
}

ExperimentConfig parse_config(const std::string& text, std::vector<Diagnostic>& diags) {
    ExperimentConfig cfg;
    std::vector<RawEntry> entries;
    std::string section;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                diags.push_back({"", "unterminated section header", lineno});
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!kKnownSections.count(section))
                diags.push_back({section, "unknown section", lineno});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            diags.push_back({"", "expected 'key = value'", lineno});
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            diags.push_back({key, "key outside any section", lineno});
            continue;
        }
        std::string full = section + "." + key;
        if (!kKnownKeys.count(full)) {
            diags.push_back({full, "unknown key", lineno});
            continue;
        }
        if (!seen.insert(full).second) {
            diags.push_back({full, "duplicate key", lineno});
            continue;
        }
        entries.push_back({section, key, value, lineno});
    }

    auto as_u64 = [&](const RawEntry& e, std::uint64_t& out) {
        try {
            std::size_t pos = 0;
            out = std::stoull(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (...) {
            diags.push_back({e.section + "." + e.key, "expected an unsigned integer", e.line});
        }
    };
    auto as_size = [&](const RawEntry& e, std::size_t& out) {
        std::uint64_t v = 0;
        as_u64(e, v);
        out = static_cast<std::size_t>(v);
    };
    auto as_double = [&](const RawEntry& e, double& out) {
        try {
            std::size_t pos = 0;
            out = std::stod(e.value, &pos);
            if (pos != e.value.size()) throw std::invalid_argument("");
        } catch (...) {
            diags.push_back({e.section + "." + e.key, "expected a number", e.line});
        }
    };
    auto as_double_list = [&](const RawEntry& e, std::vector<double>& out) {
        out.clear();
        for (const auto& tok : split(e.value, ',')) {
            try {
                std::size_t pos = 0;
                out.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument("");
            } catch (...) {
                diags.push_back({e.section + "." + e.key, "expected a comma-separated list of numbers",
                                 e.line});
                return;
            }
        }
    };

    for (const auto& e : entries) {
        std::string full = e.section + "." + e.key;
        if (full == "experiment.kind") cfg.kind = e.value;
        else if (full == "experiment.seed") as_u64(e, cfg.seed);
        else if (full == "experiment.grid_size") as_size(e, cfg.grid_size);
        else if (full == "experiment.M") as_size(e, cfg.M);
        else if (full == "experiment.N") {
            std::vector<double> xs;
            as_double_list(e, xs);
            cfg.Ns.clear();
            for (double x : xs) {
                if (!(x >= 1.0) || x != std::floor(x)) {
                    diags.push_back({full, "N entries must be positive integers", e.line});
                    break;
                }
                cfg.Ns.push_back(static_cast<std::size_t>(x));
            }
        } else if (full == "experiment.beta_star") as_double(e, cfg.beta_star);
        else if (full == "experiment.threads") as_size(e, cfg.threads);
        else if (full == "experiment.n_omega") as_size(e, cfg.n_omega);
        else if (full == "experiment.i_burn") as_size(e, cfg.i_burn);
        else if (full == "experiment.K_max") as_size(e, cfg.K_max);
        else if (full == "experiment.t") as_double(e, cfg.t);
        else if (full == "experiment.n_quad") as_size(e, cfg.n_quad);
        else if (full == "schedule.kind") cfg.schedule_kind = e.value;
        else if (full == "schedule.values") as_double_list(e, cfg.schedule_values);
        else if (full == "schedule.lo") as_double(e, cfg.iid_lo);
        else if (full == "schedule.hi") as_double(e, cfg.iid_hi);
        else if (full == "schedule.states") as_double_list(e, cfg.markov_states);
        else if (full == "schedule.transition") {
            cfg.markov_transition.clear();
            for (const auto& row : split(e.value, ';')) {
                RawEntry re{e.section, e.key, row, e.line};
                std::vector<double> r;
                as_double_list(re, r);
                cfg.markov_transition.push_back(std::move(r));
            }
        } else if (full == "schedule.tau") cfg.tau_kind = e.value;
        else if (full == "schedule.tau_a") as_double(e, cfg.tau_a);
        else if (full == "schedule.tau_b") as_double(e, cfg.tau_b);
        else if (full == "schedule.eta") as_double(e, cfg.eta);
        else if (full == "schedule.c_pert") as_double(e, cfg.c_pert);
        else if (full == "observable.name") cfg.observable = e.value;
        else if (full == "output.dir") cfg.out_dir = e.value;
    }
    cfg.finalize_hash();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path, std::vector<Diagnostic>& diags) {
    std::ifstream in(path);
    if (!in) {
        diags.push_back({path, "cannot open config file", 0});
        return {};
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), diags);
}

std::string ExperimentConfig::canonical_dump() const {
    std::ostringstream os;
    char num[64];
    auto put = [&](const std::string& k, const std::string& v) { os << k << "=" << v << "\n"; };
    auto putd = [&](const std::string& k, double v) {
        std::snprintf(num, sizeof num, "%.17g", v);
        put(k, num);
    };
    put("experiment.kind", kind);
    put("experiment.seed", std::to_string(seed));
    put("experiment.grid_size", std::to_string(grid_size));
    put("experiment.M", std::to_string(M));
    {
        std::string ns;
        for (std::size_t i = 0; i < Ns.size(); ++i) ns += (i ? "," : "") + std::to_string(Ns[i]);
        put("experiment.N", ns);
    }
    putd("experiment.beta_star", beta_star);
    put("experiment.n_omega", std::to_string(n_omega));
    put("experiment.i_burn", std::to_string(i_burn));
    put("experiment.K_max", std::to_string(K_max));
    putd("experiment.t", t);
    put("experiment.n_quad", std::to_string(n_quad));
    put("schedule.kind", schedule_kind);
    {
        std::string vs;
        for (std::size_t i = 0; i < schedule_values.size(); ++i) {
            std::snprintf(num, sizeof num, "%.17g", schedule_values[i]);
            vs += (i ? "," : "") + std::string(num);
        }
        put("schedule.values", vs);
    }
    putd("schedule.lo", iid_lo);
    putd("schedule.hi", iid_hi);
    {
        std::string ss;
        for (std::size_t i = 0; i < markov_states.size(); ++i) {
            std::snprintf(num, sizeof num, "%.17g", markov_states[i]);
            ss += (i ? "," : "") + std::string(num);
        }
        put("schedule.states", ss);
        std::string tr;
        for (std::size_t r = 0; r < markov_transition.size(); ++r) {
            if (r) tr += ";";
            for (std::size_t c = 0; c < markov_transition[r].size(); ++c) {
                std::snprintf(num, sizeof num, "%.17g", markov_transition[r][c]);
                tr += (c ? "," : "") + std::string(num);
            }
        }
        put("schedule.transition", tr);
    }
    put("schedule.tau", tau_kind);
    putd("schedule.tau_a", tau_a);
    putd("schedule.tau_b", tau_b);
    putd("schedule.eta", eta);
    putd("schedule.c_pert", c_pert);
    put("observable.name", observable);
    return os.str();
}

void ExperimentConfig::finalize_hash() {
    // FNV-1a 64
    std::string dump = canonical_dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    config_hash = buf;
}

std::vector<Diagnostic> validate_config(const ExperimentConfig& c) {
    std::vector<Diagnostic> out;
    const std::set<std::string> kinds = {"stationary_clt", "sequential_clt", "self_norming",
                                         "quenched",       "qds_covariance", "qds_clt",
                                         "rate_sweep"};
    if (!kinds.count(c.kind))
        out.push_back({"experiment.kind", c.kind.empty() ? "missing experiment kind"
                                                         : "unknown kind '" + c.kind + "'"});
    const bool is_clt = c.kind != "rate_sweep";
    if (is_clt && !(c.beta_star > 0.0 && c.beta_star < 1.0 / 3.0))
        out.push_back({"experiment.beta_star",
                       "CLT experiments require beta_star < 1/3 (theorem hypothesis); got " +
                           std::to_string(c.beta_star)});
    if (c.Ns.empty()) out.push_back({"experiment.N", "missing N list"});
    for (std::size_t i = 1; i < c.Ns.size(); ++i)
        if (c.Ns[i] <= c.Ns[i - 1]) {
            out.push_back({"experiment.N", "N values must be strictly increasing"});
            break;
        }
    const bool needs_ensemble = c.kind == "stationary_clt" || c.kind == "sequential_clt" ||
                                c.kind == "self_norming" || c.kind == "qds_covariance" ||
                                c.kind == "qds_clt";
    if (needs_ensemble && c.M < 2) out.push_back({"experiment.M", "missing or too small M"});
    if (c.grid_size < 2) out.push_back({"experiment.grid_size", "grid_size must be >= 2"});
    if (!(c.t >= 0.0 && c.t <= 1.0)) out.push_back({"experiment.t", "t must lie in [0,1]"});

    if (c.kind == "rate_sweep") return out;

    const std::set<std::string> schedule_kinds = {"constant", "alternating", "list",
                                                  "iid_uniform", "finite_markov", "qds"};
    if (!schedule_kinds.count(c.schedule_kind)) {
        out.push_back({"schedule.kind", c.schedule_kind.empty()
                                            ? "missing schedule kind"
                                            : "unknown schedule kind '" + c.schedule_kind + "'"});
        return out;
    }
    auto values_in_range = [&](const std::vector<double>& vs, const char* field) {
        for (double v : vs)
            if (!(v >= 0.0 && v <= c.beta_star)) {
                out.push_back({field, "value " + std::to_string(v) +
                                          " outside [0, beta_star]; inadmissible"});
                return;
            }
    };
    if (c.schedule_kind == "constant") {
        if (c.schedule_values.size() != 1)
            out.push_back({"schedule.values", "constant schedule needs exactly 1 value"});
        values_in_range(c.schedule_values, "schedule.values");
    } else if (c.schedule_kind == "alternating") {
        if (c.schedule_values.size() != 2)
            out.push_back({"schedule.values", "alternating schedule needs exactly 2 values"});
        values_in_range(c.schedule_values, "schedule.values");
    } else if (c.schedule_kind == "list") {
        if (c.schedule_values.empty())
            out.push_back({"schedule.values", "list schedule needs values"});
        values_in_range(c.schedule_values, "schedule.values");
    } else if (c.schedule_kind == "iid_uniform") {
        double hi = c.iid_hi < 0.0 ? c.beta_star : c.iid_hi;
        if (!(0.0 <= c.iid_lo && c.iid_lo <= hi && hi <= c.beta_star))
            out.push_back({"schedule.lo", "iid support must satisfy 0 <= lo <= hi <= beta_star"});
    } else if (c.schedule_kind == "finite_markov") {
        if (c.markov_states.empty())
            out.push_back({"schedule.states", "finite_markov needs states"});
        values_in_range(c.markov_states, "schedule.states");
        if (c.markov_transition.size() != c.markov_states.size())
            out.push_back({"schedule.transition", "transition must be square (rows ';'-separated)"});
        for (const auto& row : c.markov_transition) {
            if (row.size() != c.markov_states.size()) {
                out.push_back({"schedule.transition", "transition must be square"});
                break;
            }
            double sum = 0.0;
            for (double v : row) sum += v;
            if (std::abs(sum - 1.0) > 1e-12) {
                out.push_back({"schedule.transition", "transition rows must sum to 1"});
                break;
            }
        }
    } else if (c.schedule_kind == "qds") {
        if (c.tau_kind != "constant" && c.tau_kind != "linear")
            out.push_back({"schedule.tau", "tau must be 'constant' or 'linear'"});
        if (!(c.eta > 0.0 && c.eta <= 1.0))
            out.push_back({"schedule.eta", "eta must lie in (0,1]"});
        double lo = std::min(c.tau_a, c.tau_a + (c.tau_kind == "linear" ? c.tau_b : 0.0));
        double hi = std::max(c.tau_a, c.tau_a + (c.tau_kind == "linear" ? c.tau_b : 0.0));
        if (!(lo >= 0.0 && hi <= c.beta_star))
            out.push_back({"schedule.tau_a", "tau range must stay inside [0, beta_star]"});
    }
    if ((c.kind == "qds_covariance" || c.kind == "qds_clt") && c.schedule_kind != "qds")
        out.push_back({"schedule.kind", "QDS experiments need schedule kind 'qds'"});
    if (c.kind == "quenched" &&
        (c.schedule_kind != "iid_uniform" && c.schedule_kind != "finite_markov"))
        out.push_back({"schedule.kind", "quenched experiments need a random process schedule"});
    if (c.kind == "quenched" && c.n_omega < 2)
        out.push_back({"experiment.n_omega", "need at least 2 omega draws"});

    const std::set<std::string> observables = {"x_minus_half", "cos2pi", "lip_pair_2d",
                                               "identity"};
    if (!observables.count(c.observable))
        out.push_back({"observable.name", "unknown observable '" + c.observable + "'"});
    return out;
}

}  // namespace nspm
