#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#include "thinspec/expansion.hpp"
#include "thinspec/taylor_data.hpp"

namespace thinspec {

using Json = nlohmann::ordered_json;

/// Full-precision numeric cell (17 significant digits keeps CSV reports
/// diff-able across machines).
inline std::string csv_cell(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline Json jet_to_json(const TaylorWidthData& jet) {
    Json j;
    j["d"] = jet.d;
    j["x_bar"] = std::vector<double>(jet.x_bar.data(), jet.x_bar.data() + jet.x_bar.size());
    j["H0"] = jet.H0;
    j["k"] = jet.k;
    j["alpha"] = std::vector<double>(jet.alpha.data(), jet.alpha.data() + jet.alpha.size());
    Json beta = Json::array();
    const int n = jet.base_dim();
    for (int p = 0; p < n; ++p)
        for (int q = p; q < n; ++q)
            for (int r = q; r < n; ++r)
                if (jet.beta(p, q, r) != 0.0)
                    beta.push_back({{"index", {p, q, r}}, {"value", jet.beta(p, q, r)}});
    j["beta"] = beta;
    Json h4 = Json::array();
    for (const auto& [m, c] : jet.H4.terms()) h4.push_back({{"index", m}, {"value", c}});
    j["H4"] = h4;
    j["grad_h1"] =
        std::vector<double>(jet.grad_h1.data(), jet.grad_h1.data() + jet.grad_h1.size());
    j["fit_residual"] = jet.fit_residual;
    return j;
}

inline Json expansion_to_json(const ExpansionResult& res) {
    Json j;
    j["n"] = res.n;
    j["m"] = res.m;
    j["k"] = res.k;
    Json c;
    c["c0"] = res.c0;
    c["c2"] = res.c2k;
    c["c3"] = res.c2k1;
    if (res.has_c2k2) c["c4"] = res.c2k2;
    j["coefficients"] = c;
    j["eta_exponent"] = res.eta_exponent;
    j["remainder_order"] = res.remainder_order;
    Json prov;
    for (const auto& [key, val] : res.provenance) prov[key] = val;
    j["provenance"] = prov;
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(out.good(), errc::io_error, "cannot open for writing: " + path);
    out << content;
    require(out.good(), errc::io_error, "write failed: " + path);
}

}  // namespace thinspec
