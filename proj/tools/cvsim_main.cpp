// Command-line front end: single-point reports, grid sweeps, teleportation
// analysis of covariance-matrix files, and the membrane mode-splitting
// helper. Reports are JSON; sweeps are CSV for external plotting.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "cvsim/dual.hpp"
#include "cvsim/io.hpp"
#include "cvsim/sweep.hpp"
#include "cvsim/teleport.hpp"

using namespace cvsim;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "cvsim 1.0.0";
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output;
    std::string format = "json";
    int jobs = 0;
    unsigned seed = 0;
};

ConfigMap load_config(const CommonOpts& opts) {
    ConfigMap cfg = opts.config_path.empty() ? ConfigMap{} : parse_config_file(opts.config_path);
    for (const std::string& ov : opts.overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos) throw ConfigParse("--set expects key=value, got " + ov);
        cfg[ov.substr(0, eq)] = ov.substr(eq + 1);
    }
    return cfg;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open output file " + path);
    out << text;
}

json mat_to_json(const RMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

std::optional<FilterSpec> filter_from_config(const ConfigMap& cfg, const std::string& prefix,
                                             double omega_m) {
    if (!cfg.count(prefix + "omega_over_omega_m")) return std::nullopt;
    FilterSpec f;
    f.center = get_double(cfg, prefix + "omega_over_omega_m") * omega_m;
    f.epsilon = get_double_or(cfg, prefix + "epsilon", get_double_or(cfg, "filter_epsilon", 10.0));
    f.omega_m = omega_m;
    const std::string shape = get_string_or(cfg, prefix + "shape",
                                            get_string_or(cfg, "filter_shape", "step"));
    if (shape == "step") f.shape = FilterShape::step;
    else if (shape == "exponential") f.shape = FilterShape::exponential;
    else throw ConfigParse("filter shape must be 'step' or 'exponential'");
    return f;
}

GaussianState half_state(const RMat& v, int modes) {
    GaussianState s;
    s.modes = modes;
    s.d.assign(static_cast<size_t>(2 * modes), 0.0);
    s.v = v;
    s.conv = Convention::VacuumHalf;
    return s;
}

// one-laser report body; shared between `report` and the sweep metric hooks
json single_report(const ConfigMap& cfg, bool want_output_mode, bool* stable_out) {
    const OptomechConfig oc = optomech_from_config(cfg);
    const DerivedParams dp = derive_params(oc);
    const DriftModel model = drift_matrix(dp);
    const StabilityReport st = assess_stability(dp);
    json out;
    out["derived"] = {{"kappa", dp.kappa},
                      {"kappa_over_omega_m", dp.kappa / dp.omega_m},
                      {"g0", dp.g0},
                      {"g", dp.g},
                      {"g_over_omega_m", dp.g / dp.omega_m},
                      {"alpha_s", dp.alpha_s},
                      {"delta", dp.delta},
                      {"delta_over_omega_m", dp.delta / dp.omega_m},
                      {"nbar", dp.nbar},
                      {"gamma_m", dp.gamma_m}};
    out["stability"] = {{"s1", st.s1}, {"s2", st.s2}, {"stable", st.stable}};
    if (stable_out) *stable_out = st.stable;
    if (!st.stable) return out;
    const RMat v = steady_cm(model, SteadyMethod::lyapunov);
    const IntracavityReport rep = intracavity_report(v, model);
    out["intracavity"] = {{"e_n", rep.e_n},
                          {"n_eff", rep.n_eff},
                          {"a_plus", rep.a_plus},
                          {"a_minus", rep.a_minus},
                          {"cool_rate", rep.cool_rate},
                          {"n_eff_perturbative", rep.n_eff_perturbative}};
    out["steady_cm"] = mat_to_json(v);
    if (want_output_mode) {
        if (auto f = filter_from_config(cfg, "filter_", dp.omega_m)) {
            const RMat vo = output_cm(model, {*f});
            out["output_mode"] = {{"e_n", log_negativity(half_state(vo, 2)).e_n},
                                  {"center_over_omega_m", f->center / dp.omega_m},
                                  {"epsilon", f->epsilon}};
        }
    }
    return out;
}

json dual_report(const ConfigMap& cfg, bool* stable_out) {
    const DualConfig dc = dual_from_config(cfg);
    const DualSteadyState ss = steady_state_dual(dc);
    const DualStability st = assess_stability_dual(ss);
    json out;
    out["derived"] = {{"kappa", ss.kappa},
                      {"g_a", ss.g_a},
                      {"g_b", ss.g_b},
                      {"g_a_over_omega_m", ss.g_a / ss.omega_m},
                      {"g_b_over_omega_m", ss.g_b / ss.omega_m},
                      {"delta_a", ss.delta_a},
                      {"delta_b", ss.delta_b},
                      {"q_s", ss.q_s},
                      {"nbar", ss.nbar}};
    out["stability"] = {{"stable", st.stable}, {"balanced", st.balanced}, {"max_re", st.max_re}};
    if (stable_out) *stable_out = st.stable;
    if (!st.stable) return out;
    out["steady_cm"] = mat_to_json(intracavity_cm_dual(ss));
    if (auto fa = filter_from_config(cfg, "filter_a_", ss.omega_m)) {
        auto fb = filter_from_config(cfg, "filter_b_", ss.omega_m);
        if (fb) {
            fa->shape = FilterShape::exponential;
            fb->shape = FilterShape::exponential;
            const RMat v6 = output_cm_dual(ss, *fa, *fb);
            auto mins = tripartite_min_pt(v6);
            out["output"] = {{"e_n_mirror_a", pair_log_negativity(v6, 0, 1)},
                             {"e_n_mirror_b", pair_log_negativity(v6, 0, 2)},
                             {"e_n_optical", pair_log_negativity(v6, 1, 2)},
                             {"min_pt_eigs", {mins[0], mins[1], mins[2]}}};
        }
    }
    return out;
}

json provenance(const ConfigMap& cfg) {
    json inputs = json::object();
    for (const auto& [k, v] : cfg) inputs[k] = v;
    return {{"tool", kVersion}, {"config_hash", config_hash(cfg)}, {"inputs", inputs}};
}

// flat key,value rendering of a report for --format csv
void flatten_json(const json& j, const std::string& prefix, std::string& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it)
            flatten_json(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (j.is_array()) {
        int idx = 0;
        for (const auto& v : j) flatten_json(v, prefix + "." + std::to_string(idx++), out);
    } else {
        out += prefix + "," + (j.is_string() ? j.get<std::string>() : j.dump()) + "\n";
    }
}

std::string render_report(const json& j, const std::string& format) {
    if (format == "csv") {
        std::string out = "key,value\n";
        flatten_json(j, "", out);
        return out;
    }
    return j.dump(2) + "\n";
}

SweepAxis parse_axis(const std::string& text, bool allow_single) {
    SweepAxis ax;
    size_t p1 = text.find(':');
    size_t p2 = text.find(':', p1 + 1);
    size_t p3 = text.find(':', p2 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos || p3 == std::string::npos)
        throw ConfigParse("axis must be name:lo:hi:count, got " + text);
    ax.name = text.substr(0, p1);
    ax.lo = std::stod(text.substr(p1 + 1, p2 - p1 - 1));
    ax.hi = std::stod(text.substr(p2 + 1, p3 - p2 - 1));
    ax.count = std::stoi(text.substr(p3 + 1));
    if (ax.count < 2 && !allow_single)
        throw ConfigParse("axis point count must be >= 2 (or pass --allow-single)");
    return ax;
}

std::string format_axis_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// metric evaluators shared by sweep and dual-sweep
struct MetricPlan {
    std::vector<std::string> names;
    std::function<SweepCell(const ConfigMap&)> eval;
};

MetricPlan single_metric_plan(const std::string& metric) {
    MetricPlan plan;
    if (metric == "E_N_intracavity" || metric == "n_eff" || metric == "F_opt" ||
        metric == "stability") {
        if (metric == "stability") plan.names = {"s1", "s2"};
        else plan.names = {metric};
        plan.eval = [metric](const ConfigMap& cfg) {
            SweepCell cell;
            const DerivedParams dp = derive_params(optomech_from_config(cfg));
            const StabilityReport st = assess_stability(dp);
            if (metric == "stability") {
                cell.metrics = {st.s1, st.s2};
                cell.stable = st.stable;
                return cell;
            }
            if (!st.stable) {
                cell.metrics = {kNan};
                cell.stable = false;
                return cell;
            }
            const DriftModel model = drift_matrix(dp);
            const RMat v = steady_cm(model, SteadyMethod::lyapunov);
            if (metric == "E_N_intracavity") {
                cell.metrics = {intracavity_report(v, model).e_n};
            } else if (metric == "n_eff") {
                cell.metrics = {intracavity_report(v, model).n_eff};
            } else { // F_opt of the mirror-cavity pair
                GaussianState one = to_convention(half_state(v, 2), Convention::VacuumOne);
                OptimalMapResult r = optimal_tgcp(one.v);
                cell.metrics = {r.f_opt};
            }
            return cell;
        };
    } else if (metric == "E_N_output") {
        plan.names = {"E_N_output"};
        plan.eval = [](const ConfigMap& cfg) {
            SweepCell cell;
            const DerivedParams dp = derive_params(optomech_from_config(cfg));
            if (!assess_stability(dp).stable) {
                cell.metrics = {kNan};
                cell.stable = false;
                return cell;
            }
            auto f = filter_from_config(cfg, "filter_", dp.omega_m);
            if (!f) throw ConfigParse("E_N_output needs filter_omega_over_omega_m");
            const RMat vo = output_cm(drift_matrix(dp), {*f});
            cell.metrics = {log_negativity(half_state(vo, 2)).e_n};
            return cell;
        };
    } else if (metric == "min_pt_eigs") {
        plan.names = {"pt_mirror", "pt_mode_a", "pt_mode_b"};
        plan.eval = [](const ConfigMap& cfg) {
            SweepCell cell;
            const DerivedParams dp = derive_params(optomech_from_config(cfg));
            if (!assess_stability(dp).stable) {
                cell.metrics = {kNan, kNan, kNan};
                cell.stable = false;
                return cell;
            }
            auto fa = filter_from_config(cfg, "filter_a_", dp.omega_m);
            auto fb = filter_from_config(cfg, "filter_b_", dp.omega_m);
            if (!fa || !fb) throw ConfigParse("min_pt_eigs needs filter_a_* and filter_b_* keys");
            const RMat v6 = output_cm(drift_matrix(dp), {*fa, *fb});
            auto mins = tripartite_min_pt(v6);
            cell.metrics = {mins[0], mins[1], mins[2]};
            return cell;
        };
    } else {
        throw ConfigParse("unknown metric '" + metric + "'");
    }
    return plan;
}

MetricPlan dual_metric_plan(const std::string& metric) {
    MetricPlan plan;
    auto filters = [](const ConfigMap& cfg, const DualSteadyState& ss) {
        auto fa = filter_from_config(cfg, "filter_a_", ss.omega_m);
        auto fb = filter_from_config(cfg, "filter_b_", ss.omega_m);
        if (!fa || !fb) throw ConfigParse("dual output metrics need filter_a_* and filter_b_* keys");
        fa->shape = FilterShape::exponential;
        fb->shape = FilterShape::exponential;
        return std::pair{*fa, *fb};
    };
    if (metric == "stability") {
        plan.names = {"max_re"};
        plan.eval = [](const ConfigMap& cfg) {
            SweepCell cell;
            const DualStability st = assess_stability_dual(steady_state_dual(dual_from_config(cfg)));
            cell.metrics = {st.max_re};
            cell.stable = st.stable;
            return cell;
        };
    } else if (metric == "E_N_output") {
        plan.names = {"E_N_mirror_a", "E_N_mirror_b", "E_N_optical"};
        plan.eval = [filters](const ConfigMap& cfg) {
            SweepCell cell;
            const DualSteadyState ss = steady_state_dual(dual_from_config(cfg));
            if (!assess_stability_dual(ss).stable) {
                cell.metrics = {kNan, kNan, kNan};
                cell.stable = false;
                return cell;
            }
            auto [fa, fb] = filters(cfg, ss);
            const RMat v6 = output_cm_dual(ss, fa, fb);
            cell.metrics = {pair_log_negativity(v6, 0, 1), pair_log_negativity(v6, 0, 2),
                            pair_log_negativity(v6, 1, 2)};
            return cell;
        };
    } else if (metric == "min_pt_eigs") {
        plan.names = {"pt_mirror", "pt_mode_a", "pt_mode_b"};
        plan.eval = [filters](const ConfigMap& cfg) {
            SweepCell cell;
            const DualSteadyState ss = steady_state_dual(dual_from_config(cfg));
            if (!assess_stability_dual(ss).stable) {
                cell.metrics = {kNan, kNan, kNan};
                cell.stable = false;
                return cell;
            }
            auto [fa, fb] = filters(cfg, ss);
            auto mins = tripartite_min_pt(output_cm_dual(ss, fa, fb));
            cell.metrics = {mins[0], mins[1], mins[2]};
            return cell;
        };
    } else if (metric == "E_N_intracavity") {
        plan.names = {"E_N_mirror_a", "E_N_mirror_b", "E_N_optical"};
        plan.eval = [](const ConfigMap& cfg) {
            SweepCell cell;
            const DualSteadyState ss = steady_state_dual(dual_from_config(cfg));
            if (!assess_stability_dual(ss).stable) {
                cell.metrics = {kNan, kNan, kNan};
                cell.stable = false;
                return cell;
            }
            const RMat v6 = intracavity_cm_dual(ss);
            cell.metrics = {pair_log_negativity(v6, 0, 1), pair_log_negativity(v6, 0, 2),
                            pair_log_negativity(v6, 1, 2)};
            return cell;
        };
    } else {
        throw ConfigParse("unknown dual metric '" + metric + "'");
    }
    return plan;
}

int run_sweep_command(const CommonOpts& opts, const std::string& axis1, const std::string& axis2,
                      const std::string& metric, bool allow_single, bool dual) {
    const ConfigMap base = load_config(opts);
    const SweepAxis a1 = parse_axis(axis1, allow_single);
    const SweepAxis a2 = parse_axis(axis2, allow_single);
    const MetricPlan plan = dual ? dual_metric_plan(metric) : single_metric_plan(metric);
    SweepEval eval = [&](double x1, double x2) {
        ConfigMap cfg = base;
        cfg[a1.name] = format_axis_value(x1);
        cfg[a2.name] = format_axis_value(x2);
        try {
            return plan.eval(cfg);
        } catch (const UnstableDrift&) {
            SweepCell cell;
            cell.metrics.assign(plan.names.size(), kNan);
            cell.stable = false;
            return cell;
        }
    };
    const std::string csv = (opts.jobs == 1)
                                ? run_sweep_serial(a1, a2, plan.names, eval)
                                : run_sweep_parallel(a1, a2, plan.names, eval, opts.jobs);
    emit(csv, opts.output);
    return 0;
}

json teleport_report(const std::string& cm_path) {
    GaussianState s = read_cm_file(cm_path);
    if (s.modes != 2) throw IoError("teleport: a two-mode CM is required");
    GaussianState one = to_convention(s, Convention::VacuumOne);
    json out;
    const LogNegativityResult ln = log_negativity(one);
    out["nu"] = ln.nu;
    out["E_N"] = ln.e_n;
    if (ln.nu < 1.0) {
        const FidelityBounds b = fidelity_bounds(ln.nu);
        out["bounds"] = {{"lower", b.lower}, {"upper", b.upper}};
    } else {
        out["bounds"] = {{"lower", 0.5}, {"upper", 0.5}};
    }
    const OptimalMapResult r = optimal_tgcp(one.v);
    out["F_opt"] = r.f_opt;
    out["entangled"] = r.entangled;
    const char* side = r.side == AttenuationSide::none ? "none"
                       : r.side == AttenuationSide::alice ? "alice"
                                                          : "bob";
    out["map"] = {{"Sa", mat_to_json(r.sa)}, {"Sb", mat_to_json(r.sb)}, {"side", side}, {"tau", r.tau}};
    out["standard_form"] = {{"n", r.form.n}, {"m", r.form.m}, {"d", r.form.d}, {"lambda", r.form.lambda}};
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-variable optomechanics and teleportation toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonOpts opts;
    std::string axis1, axis2, metric = "E_N_intracavity", cm_path;
    bool allow_single = false;
    MembraneSpec memb;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config) cmd->add_option("--config", opts.config_path, "configuration file");
        cmd->add_option("--set", opts.overrides, "override config key (key=value), repeatable");
        cmd->add_option("-o,--out", opts.output, "output path (default stdout)");
        cmd->add_option("--format", opts.format, "output format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--jobs", opts.jobs, "worker threads (sweeps); 1 = serial reference");
        cmd->add_option("--seed", opts.seed, "seed echoed into reports for replay bookkeeping");
    };

    CLI::App* rep = app.add_subcommand("report", "single-point report for one driving laser");
    add_common(rep, true);
    CLI::App* sw = app.add_subcommand("sweep", "grid sweep over two config parameters");
    add_common(sw, true);
    sw->add_option("--axis1", axis1, "axis spec name:lo:hi:count")->required();
    sw->add_option("--axis2", axis2, "axis spec name:lo:hi:count")->required();
    sw->add_option("--metric", metric,
                   "E_N_intracavity | E_N_output | n_eff | min_pt_eigs | F_opt | stability");
    sw->add_flag("--allow-single", allow_single, "permit single-point axes");
    CLI::App* tp = app.add_subcommand("teleport", "optimal teleportation analysis of a CM file");
    tp->add_option("--cm", cm_path, "covariance matrix file")->required();
    add_common(tp, false);
    CLI::App* drep = app.add_subcommand("dual-report", "single-point report for two driving lasers");
    add_common(drep, true);
    CLI::App* dsw = app.add_subcommand("dual-sweep", "grid sweep for the bichromatic system");
    add_common(dsw, true);
    dsw->add_option("--axis1", axis1, "axis spec name:lo:hi:count")->required();
    dsw->add_option("--axis2", axis2, "axis spec name:lo:hi:count")->required();
    dsw->add_option("--metric", metric, "E_N_intracavity | E_N_output | min_pt_eigs | stability");
    dsw->add_flag("--allow-single", allow_single, "permit single-point axes");
    CLI::App* mb = app.add_subcommand("membrane", "mode splitting of a membrane-in-cavity");
    mb->add_option("--half-length", memb.half_length, "half cavity length, m")->required();
    mb->add_option("--q0", memb.rest_position, "membrane rest position, m")->required();
    mb->add_option("--reflectivity", memb.reflectivity, "membrane reflectivity")->required();
    mb->add_option("--transmissivity", memb.transmissivity, "membrane transmissivity");
    mb->add_option("--mode-index", memb.mode_index, "longitudinal mode index");
    add_common(mb, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (rep->parsed()) {
            const ConfigMap cfg = load_config(opts);
            bool stable = true;
            json out = single_report(cfg, true, &stable);
            out["provenance"] = provenance(cfg);
            if (opts.seed) out["provenance"]["seed"] = opts.seed;
            emit(render_report(out, opts.format), opts.output);
            return stable ? 0 : 2;
        }
        if (drep->parsed()) {
            const ConfigMap cfg = load_config(opts);
            bool stable = true;
            json out = dual_report(cfg, &stable);
            out["provenance"] = provenance(cfg);
            if (opts.seed) out["provenance"]["seed"] = opts.seed;
            emit(render_report(out, opts.format), opts.output);
            return stable ? 0 : 2;
        }
        if (sw->parsed()) return run_sweep_command(opts, axis1, axis2, metric, allow_single, false);
        if (dsw->parsed()) return run_sweep_command(opts, axis1, axis2, metric, allow_single, true);
        if (tp->parsed()) {
            emit(render_report(teleport_report(cm_path), opts.format), opts.output);
            return 0;
        }
        if (mb->parsed()) {
            MembraneSplit s = membrane_split(memb);
            json out = {{"omega_minus", s.omega_minus}, {"omega_plus", s.omega_plus},
                        {"delta_minus", s.delta_minus}, {"delta_plus", s.delta_plus},
                        {"f", s.f}};
            emit(render_report(out, opts.format), opts.output);
            return 0;
        }
    } catch (const ConfigParse& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
