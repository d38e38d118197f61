#include "fcont/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>
#include <sstream>
#include <string>

#include "fcont/bounds.hpp"
#include "fcont/error.hpp"
#include "fcont/factorize.hpp"
#include "fcont/io.hpp"
#include "fcont/parallel.hpp"

namespace fcont {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

bool RunReport::ok() const {
    for (const auto& a : assertions)
        if (a.status == CheckStatus::fail) return false;
    return true;
}

namespace {

json header(double seconds) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"timestamp", buf}, {"wall_clock_seconds", seconds}};
}

json assertions_json(const std::vector<Assertion>& as) {
    json arr = json::array();
    for (const auto& a : as) arr.push_back({{"name", a.name}, {"status", to_string(a.status)}, {"reason", a.reason}});
    return arr;
}

void add(std::vector<Assertion>& as, std::string name, bool ok, std::string reason) {
    as.push_back({std::move(name), ok ? CheckStatus::pass : CheckStatus::fail, std::move(reason)});
}

void skip(std::vector<Assertion>& as, std::string name, std::string reason) {
    as.push_back({std::move(name), CheckStatus::skipped, std::move(reason)});
}

std::vector<std::size_t> stride_indices(std::size_t n, std::size_t max_points) {
    const std::size_t stride = n <= max_points ? 1 : (n - 1 + max_points - 2) / (max_points - 1);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
    return idx;
}

FieldEnsemble columns(const FieldEnsemble& ens, const std::vector<std::size_t>& idx) {
    std::vector<double> v(ens.realizations() * idx.size());
    for (std::size_t r = 0; r < ens.realizations(); ++r)
        for (std::size_t k = 0; k < idx.size(); ++k) v[r * idx.size() + k] = ens(r, idx[k]);
    return FieldEnsemble(ens.realizations(), idx.size(), std::move(v), ens.generator());
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep;
    json results = json::object();
    auto& as = rep.assertions;

    const FieldEnsemble ens = generate(cfg.generator);
    const bool line = is_line_family(cfg.generator.family);
    const auto grid = generator_grid(cfg.generator);
    const auto plan = make_plan(cfg.plan);
    std::string g_csv, tau_csv, bounds_csv, rect_g_csv, rect_tau_csv;

    auto factorize_checks = [&](const std::string& prefix, const FactorizationResult& res) {
        const auto audit = audit_pathwise(res, res.knot_moduli, res.tau);
        add(as, prefix + "pathwise", audit.violating == 0,
            std::to_string(audit.realizations - audit.violating) + "/" + std::to_string(audit.realizations) +
                " realizations satisfy the knot inequality at " + std::to_string(res.active.size()) + " knots");
        add(as, prefix + "tau_norm", res.tau_norm <= 1.02, "||tau|| = " + fmt(res.tau_norm) + " (limit 1.02)");
        add(as, prefix + "tau0_norm", std::abs(res.tau0_norm - 1.0) <= 0.02, "||tau0|| = " + fmt(res.tau0_norm));
    };

    if (cfg.pipelines.factorize) {
        if (!line) {
            skip(as, "factorize", "the ordinary modulus needs a one-dimensional generator");
        } else {
            try {
                const auto space = DiscreteMetricSpace::line(grid);
                const auto deltas =
                    cfg.delta_grid.values.empty() ? default_delta_grid(space, cfg.delta_grid.points) : cfg.delta_grid.values;
                const auto norm = make_norm(cfg.norm, &ens);
                const auto res = build_factorization(ens, space, plan, norm, deltas);
                results["factorize"] = factorization_to_json(res);
                factorize_checks("factorize.", res);
                g_csv = knots_to_csv(res.g, "delta", "g");
                tau_csv = tau_samples_to_csv(res.tau, res.tau0);
            } catch (const DegenerateField& e) {
                add(as, "factorize", false, std::string("degenerate field: ") + e.what());
            } catch (const InvalidInput& e) {
                add(as, "factorize", false, e.what());
            }
        }
    }

    if (cfg.pipelines.entropy_bound) {
        if (!line) {
            skip(as, "entropy-bound", "needs a one-dimensional generator");
        } else {
            try {
                const auto idx = stride_indices(ens.points(), cfg.entropy.max_points);
                const auto sub = columns(ens, idx);
                const auto psi = make_psi(cfg.entropy.psi, &sub, cfg.norm.p_grid);
                const std::vector<double> pg = psi.is_degenerate() ? std::vector<double>{*psi.pin()} : cfg.norm.p_grid;
                const auto space = natural_distance(sub, psi, pg);
                auto deltas = cfg.entropy.deltas.empty() ? logspace(std::ldexp(1.0, -10), std::ldexp(1.0, -2), 20)
                                                         : cfg.entropy.deltas;
                std::erase_if(deltas, [&](double d) { return d > space.diameter(); });
                require(!deltas.empty(), "no entropy delta lies within the diameter of the natural distance");
                const auto theta = theta_function(sub, space, deltas, GlsNorm{psi, pg});
                const auto bound = entropy_integral_bound(space, psi, deltas, EntropyOptions{cfg.entropy.nodes});
                std::vector<BoundRow> rows;
                bool ok = true;
                for (std::size_t i = 0; i < deltas.size(); ++i) {
                    rows.push_back({deltas[i], theta.knots()[i].y, bound[i]});
                    ok &= bound[i] >= theta.knots()[i].y;
                }
                bounds_csv = bounds_to_csv(rows);
                results["entropy_bound"] = {{"points", idx.size()}, {"psi", psi.name()}, {"deltas", deltas.size()}};
                add(as, "entropy-bound.dominance", ok,
                    ok ? "bound dominates the empirical modulus at every delta" : "bound below the empirical modulus");
            } catch (const std::exception& e) {
                add(as, "entropy-bound", false, e.what());
            }
        }
    }

    if (cfg.pipelines.kr_bound) {
        if (!line) {
            skip(as, "kr-bound", "needs a one-dimensional generator");
        } else {
            try {
                const auto idx = stride_indices(ens.points(), cfg.kr.max_points);
                const auto sub = columns(ens, idx);
                // d = empirical |increment|_p, so the moment condition holds with equality
                const std::size_t n = idx.size();
                std::vector<double> dist(n * n, 0.0), inc(sub.realizations());
                std::vector<std::string> labels;
                for (std::size_t i = 0; i < n; ++i) {
                    labels.push_back(fmt(grid[idx[i]]));
                    for (std::size_t j = i + 1; j < n; ++j) {
                        for (std::size_t r = 0; r < inc.size(); ++r) inc[r] = sub(r, j) - sub(r, i);
                        dist[i * n + j] = dist[j * n + i] = moment_norm(inc, cfg.kr.p) * (1.0 + 1e-12);
                    }
                }
                const DiscreteMetricSpace space(std::move(labels), std::move(dist));
                const auto measure = DiscreteMeasure::uniform(n);
                const double C = regularity_constant(space, measure, cfg.kr.theta_reg);
                const auto kr = kr_factor_bound(sub, space, measure, cfg.kr.p, cfg.kr.theta_reg, C);
                results["kr_bound"] = {{"points", n},           {"p", cfg.kr.p},          {"theta_reg", cfg.kr.theta_reg},
                                       {"C_theta", number(C)},  {"coefficient", kr.coefficient},
                                       {"exponent", kr.exponent}, {"z_mean", kr.z_mean}};
                add(as, "kr-bound.z_mean", kr.z_mean <= 1.05, "mean Z = " + fmt(kr.z_mean) + " (limit 1.05)");
            } catch (const std::exception& e) {
                add(as, "kr-bound", false, e.what());
            }
        }
    }

    if (cfg.pipelines.rectangle) {
        if (line) {
            skip(as, "rectangle", "needs a brownian_sheet generator");
        } else {
            try {
                require(cfg.rectangle.direction.size() == cfg.generator.dim,
                        "rectangle.direction must have one entry per grid axis");
                const auto s = linspace(0.0, cfg.generator.t_max, cfg.rectangle.points);
                const auto res =
                    rectangle_factorization(ens, plan, make_norm(cfg.norm, &ens), cfg.rectangle.direction, s);
                results["rectangle"] = factorization_to_json(res);
                factorize_checks("rectangle.", res);
                rect_g_csv = knots_to_csv(res.g, "s", "g");
                rect_tau_csv = tau_samples_to_csv(res.tau, res.tau0);
            } catch (const DegenerateField& e) {
                add(as, "rectangle", false, std::string("degenerate field: ") + e.what());
            } catch (const InvalidInput& e) {
                add(as, "rectangle", false, e.what());
            }
        }
    }

    if (cfg.pipelines.heavy_tail) {
        if (!line) {
            skip(as, "heavy-tail", "needs a one-dimensional generator");
        } else {
            std::vector<std::size_t> levels;
            for (auto l : cfg.heavy_tail.levels)
                if (l <= ens.realizations()) levels.push_back(l);
            json diag = json::object();
            if (levels.size() >= 2) {
                const auto raw = moment_blowup_diagnostic(ens, cfg.heavy_tail.moment_p, levels);
                const auto zm = moment_blowup_diagnostic(apply_zm(ens, cfg.heavy_tail.m), cfg.heavy_tail.moment_p,
                                                         levels);
                diag = {{"levels", levels},
                        {"raw", raw.estimates},
                        {"raw_blowup", raw.fired},
                        {"transformed", zm.estimates},
                        {"transformed_blowup", zm.fired}};
                std::ostringstream msg;
                msg << "|eta|_p estimates";
                for (double v : raw.estimates) msg << " " << format_double(v);
                msg << "; transformed";
                for (double v : zm.estimates) msg << " " << format_double(v);
                add(as, "heavy-tail.transformed_moments", !zm.fired, msg.str());
            } else {
                skip(as, "heavy-tail.transformed_moments", "needs at least two sample sizes within the ensemble");
            }
            results["heavy_tail"] = {{"moment_diagnostic", diag}};
            try {
                const auto space = DiscreteMetricSpace::line(grid);
                const auto deltas =
                    cfg.delta_grid.values.empty() ? default_delta_grid(space, cfg.delta_grid.points) : cfg.delta_grid.values;
                const auto transformed = apply_zm(ens, cfg.heavy_tail.m);
                const auto res = heavy_tail_factorization(ens, space, cfg.heavy_tail.m, plan,
                                                          make_norm(cfg.norm, &transformed), deltas);
                auto j = factorization_to_json(res);
                j["moment_diagnostic"] = diag;
                results["heavy_tail"] = j;
                factorize_checks("heavy-tail.", res);
            } catch (const DegenerateField& e) {
                add(as, "heavy-tail", false, std::string("degenerate field: ") + e.what());
            } catch (const InvalidInput& e) {
                add(as, "heavy-tail", false, e.what());
            }
        }
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.doc["header"] = header(secs);
    rep.doc["version"] = kVersion;
    rep.doc["command"] = "run";
    rep.doc["seed"] = cfg.generator.seed;
    rep.doc["config"] = to_json(cfg);
    rep.doc["results"] = results;
    rep.doc["assertions"] = assertions_json(as);
    rep.doc["status"] = rep.ok() ? "PASS" : "FAIL";

    if (!g_csv.empty()) write_atomic(out_dir / "g_knots.csv", g_csv);
    if (!tau_csv.empty()) write_atomic(out_dir / "tau_samples.csv", tau_csv);
    if (!bounds_csv.empty()) write_atomic(out_dir / "bounds.csv", bounds_csv);
    if (!rect_g_csv.empty()) write_atomic(out_dir / "rectangle_g_knots.csv", rect_g_csv);
    if (!rect_tau_csv.empty()) write_atomic(out_dir / "rectangle_tau_samples.csv", rect_tau_csv);
    write_atomic(out_dir / "report.json", rep.doc.dump(2) + "\n");
    return rep;
}

RunReport verify_suite(const ExperimentConfig& cfg, const std::string& suite, const fs::path& out_dir,
                       const SuiteSizes& sizes) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto checks = run_suite(suite, cfg, sizes);
    RunReport rep;
    json arr = json::array();
    for (const auto& c : checks) {
        rep.assertions.push_back({"criterion " + std::to_string(c.criterion) + ": " + c.name, c.status, c.detail});
        arr.push_back({{"criterion", c.criterion},
                       {"name", c.name},
                       {"status", to_string(c.status)},
                       {"reason", c.detail},
                       {"data", c.data}});
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.doc["header"] = header(secs);
    rep.doc["version"] = kVersion;
    rep.doc["command"] = "verify";
    rep.doc["suite"] = suite;
    rep.doc["seed"] = cfg.generator.seed;
    rep.doc["config"] = to_json(cfg);
    rep.doc["checks"] = arr;
    rep.doc["assertions"] = assertions_json(rep.assertions);
    rep.doc["status"] = rep.ok() ? "PASS" : "FAIL";
    write_atomic(out_dir / "report.json", rep.doc.dump(2) + "\n");
    return rep;
}

void simulate_to(const ExperimentConfig& cfg, const fs::path& out_dir) {
    write_ensemble(out_dir / "ensemble.bin", generate(cfg.generator));
}

void export_to(const ExperimentConfig& cfg, const fs::path& ensemble_bin, const fs::path& out_dir) {
    const FieldEnsemble ens = ensemble_bin.empty() ? generate(cfg.generator) : read_ensemble(ensemble_bin);
    write_atomic(out_dir / "ensemble.csv", ensemble_to_csv(ens));
    const auto& axes = ens.axes();
    std::optional<DiscreteMetricSpace> space;
    if (axes.size() == 1) {
        space = DiscreteMetricSpace::line(axes.front());
    } else if (axes.empty()) {
        space = DiscreteMetricSpace::line(ensemble_bin.empty() ? generator_grid(cfg.generator)
                                                               : linspace(0.0, cfg.generator.t_max, ens.points()));
    } else if (ens.points() <= 1024) {
        // Euclidean distances between tensor-grid points, last axis fastest
        const std::size_t n = ens.points();
        std::vector<std::vector<double>> coords(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t rest = i;
            coords[i].resize(axes.size());
            for (std::size_t a = axes.size(); a-- > 0;) {
                coords[i][a] = axes[a][rest % axes[a].size()];
                rest /= axes[a].size();
            }
        }
        std::vector<double> dist(n * n);
        std::vector<std::string> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = std::to_string(i);
            for (std::size_t j = 0; j < n; ++j) {
                double s2 = 0.0;
                for (std::size_t a = 0; a < axes.size(); ++a) s2 += (coords[i][a] - coords[j][a]) * (coords[i][a] - coords[j][a]);
                dist[i * n + j] = std::sqrt(s2);
            }
        }
        space = DiscreteMetricSpace(std::move(labels), std::move(dist), std::move(coords));
    }
    if (space && space->size() <= 4096) {
        const auto measure = DiscreteMeasure::uniform(space->size());
        write_atomic(out_dir / "space.json", space_to_json(*space, &measure).dump(2) + "\n");
        write_atomic(out_dir / "space.csv", space_to_csv(*space));
    }
}

}  // namespace fcont
