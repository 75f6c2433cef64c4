#pragma once

#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "thinspec/config.hpp"
#include "thinspec/direct_solver.hpp"
#include "thinspec/expansion.hpp"
#include "thinspec/report.hpp"

namespace thinspec {

/// Known eps^1 coefficients for catalog models (the term after the constant):
/// available for the unit disk and the lemniscate.
inline std::optional<double> catalog_fourth_term(const WidthModel& model) {
    if (model.catalog_tag() == "ellipsoid") {
        const Eigen::VectorXd& a = model.params();
        if (a.size() == 2 && std::abs(a[0] - 1.0) < 1e-12 && std::abs(a[1] - 1.0) < 1e-12)
            return 11.0 / (8.0 * M_PI) + M_PI / 12.0;
        return std::nullopt;
    }
    if (model.catalog_tag() == "lemniscate")
        return 593.0 / (64.0 * std::sqrt(3.0) * M_PI) + std::sqrt(3.0) * M_PI / 4.0;
    return std::nullopt;
}

struct SweepRow {
    double eps = 0.0;
    bool has_asym = false;
    double asym3 = 0.0;
    std::optional<double> asym4;
    bool has_num = false;
    double num = 0.0;
    double num_rich = 0.0;
    double residual = 0.0;
    double measured_order = 0.0;
    bool order_flagged = false;
    std::optional<double> diff3, diff4;
    double seconds = 0.0;
    std::string error;  // non-empty marks a failed row; the sweep continues
};

struct SweepReport {
    std::string model;
    std::vector<SweepRow> rows;  // ordered by descending eps
    std::optional<double> order_fit3, order_fit4;
    std::optional<TaylorWidthData> jet;
    int resolution = 0;
    double total_seconds = 0.0;
};

/// Least-squares slope of log|diff| against log(eps) over rows that have both.
inline std::optional<double> fit_order(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [e, d] : pts) {
        if (d <= 0.0) return std::nullopt;
        const double x = std::log(e), y = std::log(d);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / denom;
}

/// Compare the truncated expansion against the direct solver over the eps
/// list. Rows run concurrently up to `jobs`; report assembly stays ordered by
/// eps. The numeric column exists for d in {2, 3}.
inline SweepReport run_sweep(const RunConfig& cfg) {
    cfg.validate();
    require(!cfg.eps.empty(), errc::invalid_input, "sweep needs a non-empty eps list");
    const WidthModel model = make_model(cfg);
    const bool numeric_supported = model.dimension() <= 3;

    SweepReport rep;
    rep.model = cfg.model;
    rep.resolution = cfg.resolution;
    const auto t_total = std::chrono::steady_clock::now();

    std::optional<ExpansionResult> expansion;
    try {
        rep.jet = model_jet(model, cfg);
        expansion = first_eigenvalue_coeffs(*rep.jet);
    } catch (const Error&) {
        // geometry outside the expansion's assumptions (e.g. constant width):
        // numeric columns still run, asymptotic cells stay empty
    }
    const std::optional<double> c5 = catalog_fourth_term(model);

    const std::vector<double> eps_list = cfg.eps_sorted_desc();
    rep.rows.resize(eps_list.size());

    auto run_row = [&](size_t i) {
        SweepRow& row = rep.rows[i];
        row.eps = eps_list[i];
        const auto t0 = std::chrono::steady_clock::now();
        if (expansion) {
            row.has_asym = true;
            row.asym3 = evaluate_expansion(*expansion, row.eps);
            if (c5) row.asym4 = row.asym3 + *c5 * row.eps;
        }
        if (numeric_supported) {
            try {
                DirectSolveResult dr =
                    solve_thin_domain(model, row.eps, cfg.resolution, 1, cfg.floor_scale,
                                      cfg.export_vectors);
                row.has_num = true;
                row.num = dr.eigenvalues[0];
                row.num_rich = dr.extrapolated[0];
                row.residual = dr.residual_norms[0];
                row.measured_order = dr.measured_order;
                row.order_flagged = dr.order_flagged;
                if (row.has_asym) {
                    row.diff3 = std::abs(row.num_rich - row.asym3);
                    if (row.asym4) row.diff4 = std::abs(row.num_rich - *row.asym4);
                }
                if (cfg.export_vectors && dr.ground_vector && !cfg.output.empty()) {
                    const std::string stem = cfg.output + "_eps" + csv_cell(row.eps) + ".vec";
                    std::ofstream bin(stem + ".bin", std::ios::binary);
                    bin.write(reinterpret_cast<const char*>(dr.ground_vector->data()),
                              dr.ground_vector->size() * sizeof(double));
                    Json side;
                    side["schema"] = 1;
                    side["eps"] = row.eps;
                    side["shape"] = {dr.ground_vector->size()};
                    side["resolution"] = dr.fine_grid->resolution;
                    side["box_lo"] = std::vector<double>(
                        dr.fine_grid->box_lo.data(),
                        dr.fine_grid->box_lo.data() + dr.fine_grid->box_lo.size());
                    side["box_hi"] = std::vector<double>(
                        dr.fine_grid->box_hi.data(),
                        dr.fine_grid->box_hi.data() + dr.fine_grid->box_hi.size());
                    write_text_file(stem + ".json", side.dump(2) + "\n");
                }
            } catch (const Error& e) {
                row.error = e.what();
            }
        }
        row.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    if (cfg.jobs <= 1) {
        for (size_t i = 0; i < rep.rows.size(); ++i) run_row(i);
    } else {
        std::vector<std::thread> pool;
        std::mutex mtx;
        size_t next = 0;
        const int workers = std::min<int>(cfg.jobs, static_cast<int>(rep.rows.size()));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    size_t i;
                    {
                        std::lock_guard lock(mtx);
                        if (next >= rep.rows.size()) return;
                        i = next++;
                    }
                    run_row(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    std::vector<std::pair<double, double>> pts3, pts4;
    for (const auto& row : rep.rows) {
        if (row.diff3) pts3.emplace_back(row.eps, *row.diff3);
        if (row.diff4) pts4.emplace_back(row.eps, *row.diff4);
    }
    rep.order_fit3 = fit_order(pts3);
    rep.order_fit4 = fit_order(pts4);
    rep.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_total).count();
    return rep;
}

/// Deterministic CSV body: exactly the documented columns; the wall-clock
/// column is zeroed here and written separately so byte-identical reruns
/// remain byte-identical.
inline std::string sweep_csv(const SweepReport& rep, bool with_timings = false) {
    std::string out = "eps,asym3,asym4,num,num_rich,diff3,diff4,order_fit,residual,seconds\n";
    for (const auto& row : rep.rows) {
        out += csv_cell(row.eps);
        out += ",";
        out += row.has_asym ? csv_cell(row.asym3) : "";
        out += ",";
        out += row.asym4 ? csv_cell(*row.asym4) : "";
        out += ",";
        out += row.has_num ? csv_cell(row.num) : "";
        out += ",";
        out += row.has_num ? csv_cell(row.num_rich) : "";
        out += ",";
        out += row.diff3 ? csv_cell(*row.diff3) : "";
        out += ",";
        out += row.diff4 ? csv_cell(*row.diff4) : "";
        out += ",";
        out += rep.order_fit3 ? csv_cell(*rep.order_fit3) : "";
        out += ",";
        out += row.has_num ? csv_cell(row.residual) : "";
        out += ",";
        out += with_timings ? csv_cell(row.seconds) : csv_cell(0.0);
        out += "\n";
    }
    return out;
}

inline std::string sweep_timings_csv(const SweepReport& rep) {
    std::string out = "eps,seconds\n";
    for (const auto& row : rep.rows) {
        out += csv_cell(row.eps);
        out += ",";
        out += csv_cell(row.seconds);
        out += "\n";
    }
    return out;
}

inline Json sweep_json(const SweepReport& rep) {
    Json j;
    j["schema"] = 1;
    j["model"] = rep.model;
    j["resolution"] = rep.resolution;
    if (rep.jet) j["jet"] = jet_to_json(*rep.jet);
    Json rows = Json::array();
    for (const auto& row : rep.rows) {
        Json r;
        r["eps"] = row.eps;
        if (row.has_asym) r["asym3"] = row.asym3;
        if (row.asym4) r["asym4"] = *row.asym4;
        if (row.has_num) {
            r["num"] = row.num;
            r["num_rich"] = row.num_rich;
            r["residual"] = row.residual;
            r["measured_order"] = row.measured_order;
            r["order_flagged"] = row.order_flagged;
        }
        if (row.diff3) r["diff3"] = *row.diff3;
        if (row.diff4) r["diff4"] = *row.diff4;
        if (!row.error.empty()) r["error"] = row.error;
        r["seconds"] = row.seconds;
        rows.push_back(r);
    }
    j["rows"] = rows;
    if (rep.order_fit3) j["order_fit3"] = *rep.order_fit3;
    if (rep.order_fit4) j["order_fit4"] = *rep.order_fit4;
    j["total_seconds"] = rep.total_seconds;
    return j;
}

}  // namespace thinspec
