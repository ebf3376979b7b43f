#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace bargainlab::cli {

// Every pipeline setting, one field per config key. The file format is
// sectioned key = value lines; dotted keys ("mte.seed") address the same
// fields from command-line overrides. Unknown keys fail fast by name.
struct PipelineConfig {
    // [input] simulated draw or an on-disk CSV, never both.
    std::string input_csv;
    std::string input_sim; // unitary | collective | mte
    int input_n = 2000;
    std::uint64_t input_seed = 1;

    // [select]
    bool select_enabled = true;
    std::string split = "both"; // son | daughter | both | pooled

    // [impute]
    bool impute_enabled = true;
    std::vector<std::string> wage_covariates{"x_dem", "father_age"};
    std::vector<std::string> exclusion_covariates{"instrument"};
    bool conditional_imputation = false;

    // [control_function]
    bool cf_enabled = true;
    std::string cf_iv = "transfer_amount";
    std::vector<std::string> cf_covariates{"x_dem", "father_age"};

    // [mte]
    bool mte_enabled = true;
    std::string mte_outcome = "schooling";
    std::vector<std::string> mte_covariates{"x_dem", "father_age"};
    std::string mte_instrument = "instrument";
    std::string mte_method = "parametric"; // parametric | semiparametric
    bool mte_band = false;                 // bootstrap band on the curve
    int mte_bootstrap = 200;               // replications when band is on
    std::uint64_t mte_seed = 17;
    double mte_grid = 0.01;

    // [structural]
    bool structural_enabled = true;
    std::vector<std::string> structural_covariates{"x_dem"};
    int structural_nodes = 16;
    std::string structural_alpha = "two_step"; // two_step | joint | a number
    double structural_endowment = 98.0;
    bool structural_use_cf = true;

    // [output] resolution order: --out flag, config key, BARGAINLAB_OUT, "out".
    std::string out_dir;
};

// Parses the sectioned key/value file. Throws ValidationError naming the
// offending line or key; IoError when the file cannot be read.
PipelineConfig parse_config_file(const std::string& path);

// Applies one "section.key=value" override on top of a parsed config.
void apply_override(PipelineConfig& cfg, const std::string& dotted, const std::string& value);

// Cross-field invariants: exactly one input source, at least one stage
// enabled, positive counts, seeds wherever randomness occurs.
void validate_config(const PipelineConfig& cfg);

// Every key with its current value, for the manifest and for --help text;
// keys are dotted and sorted.
std::map<std::string, std::string> flatten_config(const PipelineConfig& cfg);

} // namespace bargainlab::cli
