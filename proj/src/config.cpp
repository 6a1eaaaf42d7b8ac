#include "mbd/config.hpp"

#include <istream>
#include <sstream>

#include "mbd/error.hpp"

namespace mbd {

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(value);
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: key '" + key + "' expects an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ParseError("config: key '" + key + "' expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ParseError("config: key '" + key + "' expects a boolean, got '" + value + "'");
}

} // namespace

void apply_config_entry(RunConfig& config, const std::string& key, const std::string& value) {
    if (key == "seed") {
        try {
            std::size_t used = 0;
            config.seed = static_cast<std::uint64_t>(std::stoull(value, &used));
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ParseError("config: key 'seed' expects an unsigned integer, got '" + value +
                             "'");
        }
    } else if (key == "jobs") {
        config.jobs = parse_int(key, value);
    } else if (key == "epochs") {
        config.train.epochs = parse_int(key, value);
    } else if (key == "histogram_bins") {
        config.histogram_bins = parse_int(key, value);
    } else if (key == "corpus") {
        config.corpus_path = value;
    } else if (key == "predictions") {
        config.predictions_paths = split_list(value);
    } else if (key == "split_file") {
        config.split_path = value;
    } else if (key == "mode") {
        config.mode = value;
    } else if (key == "bias_type") {
        config.bias_type = value;
    } else if (key == "experiment") {
        config.experiment = value;
    } else if (key == "out") {
        config.out_dir = value;
    } else if (key == "ngram.n_max") {
        config.train.ngram_n_max = parse_int(key, value);
    } else if (key == "ngram.min_count") {
        config.train.ngram_min_count = parse_int(key, value);
    } else if (key == "grid.sampling") {
        config.grid.sampling.clear();
        for (const std::string& v : split_list(value))
            config.grid.sampling.push_back(sampling_from_string(v));
    } else if (key == "grid.k") {
        config.grid.k.clear();
        for (const std::string& v : split_list(value)) config.grid.k.push_back(parse_int(key, v));
    } else if (key == "grid.components") {
        config.grid.component_counts.clear();
        for (const std::string& v : split_list(value))
            config.grid.component_counts.push_back(parse_int(key, v));
    } else if (key == "grid.order") {
        config.grid.orders.clear();
        for (const std::string& v : split_list(value))
            config.grid.orders.push_back(parse_int(key, v));
    } else if (key == "grid.cost") {
        config.grid.costs.clear();
        for (const std::string& v : split_list(value))
            config.grid.costs.push_back(parse_double(key, v));
    } else if (key == "grid.balanced") {
        config.grid.balanced.clear();
        for (const std::string& v : split_list(value))
            config.grid.balanced.push_back(parse_bool(key, v));
    } else if (key == "grid.ngram_binary") {
        config.grid.ngram_binary.clear();
        for (const std::string& v : split_list(value))
            config.grid.ngram_binary.push_back(parse_bool(key, v));
    } else {
        throw ParseError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_config(std::istream& in) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(config, key, value);
        } catch (const ParseError& e) {
            throw ParseError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

} // namespace mbd
