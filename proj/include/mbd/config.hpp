#ifndef MBD_CONFIG_HPP
#define MBD_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mbd/experiments.hpp"

namespace mbd {

// Everything a run needs; populated from a key = value config file and/or
// command-line flags (flags win).
struct RunConfig {
    std::uint64_t seed = 7;
    int jobs = 1;
    GridSpec grid;
    PipelineTrainOptions train;
    int histogram_bins = 20;

    std::string corpus_path;
    std::vector<std::string> predictions_paths;
    std::string split_path;
    std::string mode;
    std::string bias_type;
    std::string experiment;
    std::string out_dir;
};

// Lines of `key = value`; '#' starts a comment. List values are
// comma-separated. Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value);

} // namespace mbd

#endif
