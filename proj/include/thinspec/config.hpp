#pragma once

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "thinspec/errors.hpp"
#include "thinspec/jet_extraction.hpp"
#include "thinspec/width_model.hpp"

namespace thinspec {

/// Run parameters shared by the CLI subcommands. Populated from a flat
/// key-value config file plus flag overrides.
struct RunConfig {
    std::string model = "ellipsoid";  // ellipsoid | lemniscate | rectangle | csv
    Eigen::VectorXd a;                // ellipsoid semi-axes
    std::string csv_path;             // sampled custom width (model = csv)
    std::vector<double> eps;          // strictly positive, reported descending
    int resolution = 128;             // power of two in [32, 1024]
    int count = 1;
    int jobs = 1;
    int levels = 8;      // spectrum listing length
    int group = -1;      // spectrum: degenerate group to expand (-1: none)
    std::string output;  // output path prefix
    bool numeric_jet = false;
    bool export_vectors = false;
    double floor_scale = 2.0;
    Eigen::VectorXd max_seed;  // optional locate_max seed

    void validate() const {
        for (double e : eps)
            require(e > 0.0 && std::isfinite(e), errc::invalid_input,
                    "eps values must be strictly positive");
        require(resolution >= 32 && resolution <= 1024 &&
                    (resolution & (resolution - 1)) == 0,
                errc::invalid_input, "resolution must be a power of two in [32, 1024]");
        require(count >= 1 && jobs >= 1 && levels >= 1, errc::invalid_input,
                "count, jobs and levels must be >= 1");
    }

    std::vector<double> eps_sorted_desc() const {
        std::vector<double> v = eps;
        std::sort(v.begin(), v.end(), std::greater<double>());
        return v;
    }
};

inline std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    return out;
}

/// Flat `key = value` (or `key value`) file; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), errc::io_error, "cannot open config: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string key, value;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            key = line.substr(0, eq);
            value = line.substr(eq + 1);
        } else {
            std::istringstream ls(line);
            ls >> key;
            std::getline(ls, value);
        }
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

inline void apply_config_entries(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "model")
            cfg.model = value;
        else if (key == "a") {
            auto v = parse_double_list(value);
            cfg.a = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
        } else if (key == "csv")
            cfg.csv_path = value;
        else if (key == "eps")
            cfg.eps = parse_double_list(value);
        else if (key == "resolution")
            cfg.resolution = std::stoi(value);
        else if (key == "count")
            cfg.count = std::stoi(value);
        else if (key == "jobs")
            cfg.jobs = std::stoi(value);
        else if (key == "levels")
            cfg.levels = std::stoi(value);
        else if (key == "group")
            cfg.group = std::stoi(value);
        else if (key == "output")
            cfg.output = value;
        else if (key == "numeric_jet")
            cfg.numeric_jet = value == "1" || value == "true";
        else if (key == "export_vectors")
            cfg.export_vectors = value == "1" || value == "true";
        else if (key == "floor_scale")
            cfg.floor_scale = std::stod(value);
        else if (key == "max_seed") {
            auto v = parse_double_list(value);
            cfg.max_seed = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
        } else
            raise(errc::invalid_input, "unknown config key: " + key);
    }
}

inline WidthModel make_model(const RunConfig& cfg) {
    if (cfg.model == "ellipsoid") {
        require(cfg.a.size() >= 2, errc::invalid_input,
                "ellipsoid model needs semi-axes (key `a`)");
        return make_ellipsoid(cfg.a);
    }
    if (cfg.model == "lemniscate") return make_lemniscate();
    if (cfg.model == "rectangle") return make_rectangle();
    if (cfg.model == "csv") return make_sampled_csv(cfg.csv_path);
    raise(errc::invalid_input, "unknown model: " + cfg.model);
}

/// Jet for the configured model: closed form for the ellipsoid catalog unless
/// a numeric jet is forced; maximum search plus extraction otherwise.
inline TaylorWidthData model_jet(const WidthModel& model, const RunConfig& cfg) {
    if (model.catalog_tag() == "ellipsoid" && !cfg.numeric_jet)
        return ellipsoid_taylor(model.params());
    Eigen::VectorXd seed = cfg.max_seed;
    if (seed.size() != model.base_dim()) {
        seed = 0.5 * (model.box_lo() + model.box_hi());
        if (model.catalog_tag() == "lemniscate") seed[0] = 0.5;
        if (!model.inside(seed)) seed = 0.9 * seed;
    }
    const Eigen::VectorXd x_bar = locate_max(model, seed, 1e-10);
    return extract_taylor(model, x_bar);
}

}  // namespace thinspec
