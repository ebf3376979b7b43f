#include "pipeline_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "bargainlab/csv.hpp"
#include "bargainlab/errors.hpp"

namespace bargainlab::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

long long parse_int(const std::string& v, const std::string& key) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ValidationError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
    return out;
}

double parse_real(const std::string& v, const std::string& key) {
    return csv::parse_double_strict(v, "config key '" + key + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",";
        out += v[i];
    }
    return out;
}

struct Key {
    std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const PipelineConfig&)> get;
};

const std::map<std::string, Key>& key_table() {
    auto str = [](std::string PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string&) { c.*f = v; },
                   [f](const PipelineConfig& c) { return c.*f; }};
    };
    auto boolean = [](bool PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string& k) {
                       c.*f = parse_bool(v, k);
                   },
                   [f](const PipelineConfig& c) { return c.*f ? std::string("true") : std::string("false"); }};
    };
    auto integer = [](int PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string& k) {
                       c.*f = static_cast<int>(parse_int(v, k));
                   },
                   [f](const PipelineConfig& c) { return std::to_string(c.*f); }};
    };
    auto seed = [](std::uint64_t PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string& k) {
                       const long long x = parse_int(v, k);
                       if (x < 0) throw ValidationError("config key '" + k + "': seed must be nonnegative");
                       c.*f = static_cast<std::uint64_t>(x);
                   },
                   [f](const PipelineConfig& c) { return std::to_string(c.*f); }};
    };
    auto real = [](double PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string& k) {
                       c.*f = parse_real(v, k);
                   },
                   [f](const PipelineConfig& c) { return csv::format_double(c.*f, 12); }};
    };
    auto list = [](std::vector<std::string> PipelineConfig::* f) {
        return Key{[f](PipelineConfig& c, const std::string& v, const std::string&) {
                       c.*f = parse_list(v);
                   },
                   [f](const PipelineConfig& c) { return join(c.*f); }};
    };

    static const std::map<std::string, Key> table = {
        {"input.csv", str(&PipelineConfig::input_csv)},
        {"input.sim", str(&PipelineConfig::input_sim)},
        {"input.n", integer(&PipelineConfig::input_n)},
        {"input.seed", seed(&PipelineConfig::input_seed)},
        {"select.enabled", boolean(&PipelineConfig::select_enabled)},
        {"select.split", str(&PipelineConfig::split)},
        {"impute.enabled", boolean(&PipelineConfig::impute_enabled)},
        {"impute.wage_covariates", list(&PipelineConfig::wage_covariates)},
        {"impute.exclusion_covariates", list(&PipelineConfig::exclusion_covariates)},
        {"impute.conditional", boolean(&PipelineConfig::conditional_imputation)},
        {"control_function.enabled", boolean(&PipelineConfig::cf_enabled)},
        {"control_function.iv", str(&PipelineConfig::cf_iv)},
        {"control_function.covariates", list(&PipelineConfig::cf_covariates)},
        {"mte.enabled", boolean(&PipelineConfig::mte_enabled)},
        {"mte.outcome", str(&PipelineConfig::mte_outcome)},
        {"mte.covariates", list(&PipelineConfig::mte_covariates)},
        {"mte.instrument", str(&PipelineConfig::mte_instrument)},
        {"mte.method", str(&PipelineConfig::mte_method)},
        {"mte.band", boolean(&PipelineConfig::mte_band)},
        {"mte.bootstrap", integer(&PipelineConfig::mte_bootstrap)},
        {"mte.seed", seed(&PipelineConfig::mte_seed)},
        {"mte.grid", real(&PipelineConfig::mte_grid)},
        {"structural.enabled", boolean(&PipelineConfig::structural_enabled)},
        {"structural.covariates", list(&PipelineConfig::structural_covariates)},
        {"structural.nodes", integer(&PipelineConfig::structural_nodes)},
        {"structural.alpha", str(&PipelineConfig::structural_alpha)},
        {"structural.endowment", real(&PipelineConfig::structural_endowment)},
        {"structural.use_cf_residual", boolean(&PipelineConfig::structural_use_cf)},
        {"output.dir", str(&PipelineConfig::out_dir)},
    };
    return table;
}

void set_key(PipelineConfig& cfg, const std::string& dotted, const std::string& value) {
    const auto& table = key_table();
    const auto it = table.find(dotted);
    if (it == table.end()) {
        throw ValidationError("unknown config key '" + dotted + "'");
    }
    it->second.set(cfg, value, dotted);
}

} // namespace

PipelineConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    PipelineConfig cfg;
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": key '" + key +
                                  "' appears before any [section] header");
        }
        set_key(cfg, section + "." + key, value);
    }
    return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& dotted, const std::string& value) {
    set_key(cfg, dotted, value);
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.input_csv.empty() == cfg.input_sim.empty()) {
        throw ValidationError("config: set exactly one of input.csv and input.sim");
    }
    if (!cfg.input_sim.empty()) {
        if (cfg.input_sim != "unitary" && cfg.input_sim != "collective" && cfg.input_sim != "mte") {
            throw ValidationError("config: input.sim must be unitary, collective, or mte, got '" +
                                  cfg.input_sim + "'");
        }
        if (cfg.input_n < 1) throw ValidationError("config: input.n must be positive");
    }
    if (cfg.split != "son" && cfg.split != "daughter" && cfg.split != "both" &&
        cfg.split != "pooled") {
        throw ValidationError("config: select.split must be son, daughter, both, or pooled");
    }
    if (!cfg.impute_enabled && !cfg.cf_enabled && !cfg.mte_enabled && !cfg.structural_enabled &&
        !cfg.select_enabled) {
        throw ValidationError("config: every stage is disabled; enable at least one");
    }
    if (cfg.mte_enabled) {
        if (cfg.mte_method != "parametric" && cfg.mte_method != "semiparametric") {
            throw ValidationError("config: mte.method must be parametric or semiparametric");
        }
        if (cfg.mte_bootstrap < 1) {
            throw ValidationError("config: mte.bootstrap must be positive");
        }
        if (!(cfg.mte_grid > 0.0 && cfg.mte_grid <= 0.5)) {
            throw ValidationError("config: mte.grid must lie in (0, 0.5]");
        }
    }
    if (cfg.structural_enabled) {
        if (cfg.structural_nodes < 1 || cfg.structural_nodes > 64) {
            throw ValidationError("config: structural.nodes must lie in [1, 64]");
        }
        if (cfg.structural_alpha != "two_step" && cfg.structural_alpha != "joint") {
            const double a =
                csv::parse_double_strict(cfg.structural_alpha, "config key 'structural.alpha'");
            if (!(a > 0.0 && a < 1.0)) {
                throw ValidationError("config: fixed structural.alpha must lie in (0, 1)");
            }
        }
        if (!(cfg.structural_endowment > 0.0)) {
            throw ValidationError("config: structural.endowment must be positive");
        }
    }
}

std::map<std::string, std::string> flatten_config(const PipelineConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [key, acc] : key_table()) out[key] = acc.get(cfg);
    return out;
}

} // namespace bargainlab::cli
