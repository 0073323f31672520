// ipevo: sampling, evolution and statistical verification of interval
// partition diffusions with Poisson-Dirichlet stationary laws.

#include <CLI11.hpp>
#include <json.hpp>

#include "ipevo/besq.hpp"
#include "ipevo/depois.hpp"
#include "ipevo/experiments.hpp"
#include "ipevo/io.hpp"
#include "ipevo/kernels.hpp"
#include "ipevo/parallel.hpp"
#include "ipevo/pdip.hpp"
#include "ipevo/scaffold.hpp"
#include "ipevo/trace.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace ipevo;

namespace {

std::uint64_t parse_seed(const std::string& s) {
    return std::stoull(s, nullptr, 0); // decimal or 0x-hex
}

IntervalPartition load_init(const std::string& spec, double alpha, double eps, Rng& rng) {
    if (spec.rfind("pdip:", 0) == 0) {
        std::string v = spec.substr(5);
        if (v == "a0") return sample_pdip(rng, alpha, PdipVariant::alpha_zero, eps);
        if (v == "aa") return sample_pdip(rng, alpha, PdipVariant::alpha_alpha, eps);
        throw invalid_input("unknown pdip variant '" + v + "' (want a0|aa)");
    }
    if (spec.rfind("block:", 0) == 0) return make_partition({std::stod(spec.substr(6))});
    if (spec == "empty") return IntervalPartition{};
    std::ifstream is(spec);
    if (!is) throw invalid_input("cannot read init file " + spec);
    std::stringstream ss;
    ss << is.rdbuf();
    return io::partition_from_json(ss.str());
}

std::string canonical_config(const std::map<std::string, std::string>& kv) {
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + ";";
    return s;
}

// Inject values from a flat JSON config file as defaults; explicit command
// line flags keep precedence because they are parsed after these tokens.
std::vector<std::string> config_tokens(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw invalid_input("cannot read config file " + path);
    nlohmann::json j = nlohmann::json::parse(is);
    std::vector<std::string> toks;
    for (auto& [k, v] : j.items()) {
        std::string val = v.is_string() ? v.get<std::string>() : v.dump();
        toks.push_back("--" + k + "=" + val);
    }
    return toks;
}

int run_verify(const std::string& which, const experiments::SuiteConfig& cfg,
               const std::string& out_dir) {
    experiments::Reports reports;
    if (which == "all")
        reports = experiments::verify_all(cfg);
    else if (which == "clades")
        reports = experiments::verify_clades(cfg);
    else if (which == "kernels")
        reports = experiments::verify_kernels(cfg);
    else if (which == "pseudostat")
        reports = experiments::verify_pseudostat(cfg);
    else if (which == "stationarity")
        reports = experiments::verify_stationarity(cfg);
    else if (which == "conjecture")
        reports = experiments::verify_conjecture(cfg);
    else
        throw invalid_input("unknown verify suite '" + which + "'");

    std::map<std::string, std::string> kv{{"suite", which},
                                          {"alpha", std::to_string(cfg.alpha)},
                                          {"scale", std::to_string(cfg.scale)}};
    std::string hash = io::config_hash(canonical_config(kv));
    bool all_pass = true;
    for (const auto& r : reports) {
        if (!out_dir.empty()) io::atomic_write(out_dir + "/" + r.test_id + ".json",
                                               io::report_to_json(r));
        if (!r.informational && !r.pass) all_pass = false;
        std::string stat = r.p_value ? "p=" + std::to_string(*r.p_value)
                                     : "z=" + std::to_string(r.z_score.value_or(0));
        std::printf("[%s] %-42s n=%-7zu %s%s\n", r.pass ? "PASS" : "FAIL", r.test_id.c_str(),
                    r.n, stat.c_str(), r.informational ? " (probe)" : "");
    }
    if (!out_dir.empty())
        io::atomic_write(out_dir + "/summary.csv",
                         io::reports_summary_csv(reports, hash, cfg.seed));
    return all_pass ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"interval partition evolutions: samplers, kernels and verification"};
    app.require_subcommand(1);

    std::string seed_str = "42";
    int threads = 0;
    app.add_option("--seed", seed_str, "master seed (decimal or 0x-hex)");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    // ---- sample ----
    auto* sample = app.add_subcommand("sample", "draw from the built-in samplers");
    sample->require_subcommand(1);
    sample->fallthrough();
    double s_alpha = 0.5, s_eps = 1e-8, s_delta = 0, s_z0 = 1.0, s_lifetime = 1.0, s_b = 1.0;
    double s_level = -1, s_zcut = 0;
    std::size_t s_n = 1;
    std::string s_variant = "aa", s_out, s_grid = "0:1:0.01";
    auto* sp = sample->add_subcommand("pdip", "Poisson-Dirichlet interval partitions (jsonl)");
    sp->fallthrough();
    sp->add_option("--alpha", s_alpha);
    sp->add_option("--variant", s_variant, "aa|a0");
    sp->add_option("--eps", s_eps);
    sp->add_option("--n", s_n);
    sp->add_option("--out", s_out);
    auto* sb = sample->add_subcommand("besq", "squared Bessel paths (csv)");
    sb->fallthrough();
    sb->add_option("--delta", s_delta)->required();
    sb->add_option("--z0", s_z0);
    sb->add_option("--grid", s_grid);
    sb->add_option("--n", s_n);
    sb->add_option("--out", s_out);
    auto* ss = sample->add_subcommand("spindle", "excursion conditioned on lifetime (csv)");
    ss->fallthrough();
    ss->add_option("--alpha", s_alpha);
    ss->add_option("--lifetime", s_lifetime);
    ss->add_option("--grid", s_grid);
    ss->add_option("--out", s_out);
    auto* sc = sample->add_subcommand("clade", "one clade system (json)");
    sc->fallthrough();
    sc->add_option("--alpha", s_alpha);
    sc->add_option("--b", s_b);
    sc->add_option("--zcut", s_zcut);
    sc->add_option("--level", s_level, "optional skewer level to include");
    sc->add_option("--out", s_out);

    // ---- evolve ----
    auto* evolve = app.add_subcommand("evolve", "evolve interval partitions over a level grid");
    evolve->fallthrough();
    std::string e_method = "kernel", e_type = "1", e_levels = "0:0.5:0.1", e_init = "pdip:a0";
    std::string e_out = "trace.csv", e_config;
    double e_alpha = 0.5, e_eps = 1e-6, e_zcut = 0, e_depth = 0;
    std::size_t e_n = 100;
    evolve->add_option("--config", e_config, "JSON config file (flags override)");
    evolve->add_option("--method", e_method, "kernel|scaffold");
    evolve->add_option("--type", e_type, "1|0");
    evolve->add_option("--alpha", e_alpha);
    evolve->add_option("--levels", e_levels, "start:stop:step or comma list");
    evolve->add_option("--init", e_init, "file.json | pdip:a0 | pdip:aa | block:MASS | empty");
    evolve->add_option("--n", e_n);
    evolve->add_option("--eps", e_eps);
    evolve->add_option("--zcut", e_zcut);
    evolve->add_option("--depth", e_depth, "type-0 descent depth (0 = auto)");
    evolve->add_option("--out", e_out);

    // ---- depoissonize ----
    auto* dp = app.add_subcommand("depoissonize", "unit-mass time-changed trace");
    dp->fallthrough();
    std::string d_in, d_out = "dp.csv";
    double d_alpha = 0.5;
    dp->add_option("--in", d_in)->required();
    dp->add_option("--alpha", d_alpha);
    dp->add_option("--out", d_out);

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run a statistical verification suite");
    verify->fallthrough();
    std::string v_which = "all", v_out = "reports", v_stats;
    double v_alpha = 0.5, v_scale = 1.0;
    verify->add_option("suite", v_which, "all|clades|kernels|pseudostat|stationarity|conjecture");
    verify->add_option("--alpha", v_alpha);
    verify->add_option("--stats", v_stats, "clade statistic selection, e.g. iv,v,vi,a2");
    verify->add_option("--scale", v_scale, "replicate count multiplier");
    verify->add_option("--out", v_out);

    // ---- report ----
    auto* report = app.add_subcommand("report", "render histograms from a trace csv");
    report->fallthrough();
    std::string r_in, r_column = "total_mass", r_out = "report.svg";
    double r_level = -1;
    report->add_option("--in", r_in)->required();
    report->add_option("--column", r_column, "total_mass|leftmost_mass|largest_mass|block_count");
    report->add_option("--level", r_level, "restrict to one level (-1 = all)");
    report->add_option("--out", r_out);

    // pre-scan for --config so file values become defaults
    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string cfg_path;
        if (args[i].rfind("--config=", 0) == 0)
            cfg_path = args[i].substr(9);
        else if (args[i] == "--config" && i + 1 < args.size())
            cfg_path = args[i + 1];
        if (!cfg_path.empty()) {
            try {
                auto toks = config_tokens(cfg_path);
                args.insert(args.begin() + static_cast<long>(i) + (args[i] == "--config" ? 2 : 1),
                            toks.begin(), toks.end());
            } catch (const std::exception& e) {
                std::fprintf(stderr, "ipevo: %s\n", e.what());
                return 1;
            }
            break;
        }
    }
    std::vector<const char*> cargs{argv[0]};
    for (auto& a : args) cargs.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        const std::uint64_t seed = parse_seed(seed_str);
        Rng root = make_stream(seed);

        if (sample->parsed()) {
            if (sp->parsed()) {
                std::string out;
                Rng r = root.child("sample-pdip");
                for (std::size_t i = 0; i < s_n; ++i) {
                    Rng ri = r.child(i);
                    auto p = sample_pdip(ri, s_alpha,
                                         s_variant == "a0" ? PdipVariant::alpha_zero
                                                           : PdipVariant::alpha_alpha,
                                         s_eps);
                    out += io::partition_to_json(p, s_alpha) + "\n";
                }
                if (s_out.empty())
                    std::fputs(out.c_str(), stdout);
                else
                    io::atomic_write(s_out, out);
            } else if (sb->parsed()) {
                auto grid = io::parse_level_grid(s_grid);
                std::string out = "replicate,time,value\n";
                Rng r = root.child("sample-besq");
                for (std::size_t i = 0; i < s_n; ++i) {
                    Rng ri = r.child(i);
                    auto path = besq::besq_path(ri, s_delta, s_z0, grid, s_delta <= 0);
                    for (std::size_t k = 0; k < grid.size(); ++k)
                        out += std::to_string(i) + "," + std::to_string(path.times[k]) + "," +
                               std::to_string(path.values[k]) + "\n";
                }
                if (s_out.empty())
                    std::fputs(out.c_str(), stdout);
                else
                    io::atomic_write(s_out, out);
            } else if (ss->parsed()) {
                auto grid = io::parse_level_grid(s_grid);
                Rng r = root.child("sample-spindle");
                auto vals = besq::sample_spindle_given_lifetime(r, s_alpha, s_lifetime, grid);
                std::string out = "time,value\n";
                for (std::size_t k = 0; k < grid.size(); ++k)
                    out += std::to_string(grid[k]) + "," + std::to_string(vals[k]) + "\n";
                if (s_out.empty())
                    std::fputs(out.c_str(), stdout);
                else
                    io::atomic_write(s_out, out);
            } else if (sc->parsed()) {
                scaffold::Config scfg;
                scfg.alpha = s_alpha;
                scfg.z_cutoff = s_zcut;
                auto eng = scaffold::Engine::make(scfg, std::max(s_level, 1.0));
                Rng r = root.child("sample-clade");
                auto clade = scaffold::build_clade(r, eng, s_b);
                nlohmann::json j;
                j["alpha"] = s_alpha;
                j["initial_mass"] = clade.initial_mass;
                j["initial_lifetime"] = clade.initial_spindle.lifetime();
                j["length"] = clade.length;
                j["z_cutoff"] = eng.cfg.z_cutoff;
                j["compensator_slope"] = clade.slope;
                nlohmann::json pts = nlohmann::json::array();
                for (auto& [pt, spd] : clade.points)
                    pts.push_back({{"t", pt.t},
                                   {"x_before", pt.x_before},
                                   {"lifetime", spd.lifetime()}});
                j["points"] = std::move(pts);
                if (s_level >= 0) {
                    std::vector<scaffold::CladeSystem> one;
                    one.push_back(std::move(clade));
                    auto sk = scaffold::skewer(one, s_level, 1e-12);
                    j["skewer"] = nlohmann::json::parse(io::partition_to_json(sk, s_alpha));
                }
                if (s_out.empty())
                    std::puts(j.dump(2).c_str());
                else
                    io::atomic_write(s_out, j.dump(2));
            }
            return 0;
        }

        if (evolve->parsed()) {
            auto levels = io::parse_level_grid(e_levels);
            EvolutionType type = (e_type == "0") ? EvolutionType::type0 : EvolutionType::type1;
            std::map<std::string, std::string> kv{
                {"method", e_method}, {"type", e_type},     {"alpha", std::to_string(e_alpha)},
                {"levels", e_levels}, {"init", e_init},     {"n", std::to_string(e_n)},
                {"eps", std::to_string(e_eps)}, {"zcut", std::to_string(e_zcut)}};
            std::string csv = io::trace_header(io::config_hash(canonical_config(kv)), seed);
            csv += "replicate,level,total_mass,block_count,leftmost_mass,largest_mass,"
                   "diversity_total\n";
            std::vector<std::string> rows(e_n);
            Rng r = root.child("evolve");
            kernel::KernelParams kp{e_alpha, e_eps};
            scaffold::Config scfg;
            scfg.alpha = e_alpha;
            scfg.z_cutoff = e_zcut;
            scfg.eps = e_eps;
            auto eng = scaffold::Engine::make(scfg, levels.back() > 0 ? levels.back() : 1.0);
            parallel_for(e_n, threads, [&](std::size_t i) {
                Rng ri = r.child(i);
                auto init = load_init(e_init, e_alpha, e_eps, ri);
                EvolutionTrace tr;
                if (e_method == "kernel") {
                    tr = kernel::evolve_by_kernel(ri, kp, init, levels, type);
                } else if (e_method == "scaffold") {
                    tr = (type == EvolutionType::type1)
                             ? scaffold::type1_evolution_scaffold(ri, eng, init, levels)
                             : scaffold::type0_evolution_scaffold(ri, eng, init, levels,
                                                                  e_depth);
                } else {
                    throw invalid_input("unknown method '" + e_method + "'");
                }
                std::string row;
                io::append_trace_rows(row, i, tr);
                rows[i] = std::move(row);
            });
            for (auto& row : rows) csv += row;
            io::atomic_write(e_out, csv);
            std::fprintf(stderr, "wrote %s (%zu replicates x %zu levels)\n", e_out.c_str(), e_n,
                         levels.size());
            return 0;
        }

        if (dp->parsed()) {
            std::ifstream is(d_in);
            if (!is) throw invalid_input("cannot read " + d_in);
            std::string line, header;
            std::string out;
            // pass metadata through, add the de-Poissonized columns
            std::map<std::size_t, std::vector<std::array<double, 7>>> rows;
            while (std::getline(is, line)) {
                if (line.empty()) continue;
                if (line[0] == '#') {
                    out += line + "\n";
                    continue;
                }
                if (line.rfind("replicate,", 0) == 0) {
                    header = line;
                    continue;
                }
                std::array<double, 7> v{};
                std::size_t rep = 0;
                std::istringstream ls(line);
                std::string tok;
                for (int c = 0; std::getline(ls, tok, ','); ++c) {
                    if (c == 0)
                        rep = static_cast<std::size_t>(std::stoull(tok));
                    else if (c <= 6)
                        v[static_cast<std::size_t>(c)] = std::stod(tok);
                }
                rows[rep].push_back(v);
            }
            out += "replicate,u,level_at_u,total_mass,block_count,leftmost_mass,largest_mass,"
                   "diversity_total\n";
            for (auto& [rep, rs] : rows) {
                std::vector<double> levels, mass;
                for (auto& v : rs) {
                    levels.push_back(v[1]);
                    mass.push_back(v[2]);
                }
                std::size_t last = 0;
                while (last + 1 < mass.size() && mass[last + 1] > 0) ++last;
                auto tc = TimeChange::from_mass_path(
                    {levels.begin(), levels.begin() + static_cast<long>(last) + 1},
                    {mass.begin(), mass.begin() + static_cast<long>(last) + 1});
                for (std::size_t k = 0; k <= last; ++k) {
                    double m = mass[k];
                    double da = std::pow(m, -d_alpha);
                    out += std::to_string(rep) + "," + std::to_string(tc.u_knots[k]) + "," +
                           std::to_string(levels[k]) + ",1," +
                           std::to_string(static_cast<std::size_t>(rs[k][3])) + "," +
                           std::to_string(rs[k][4] / m) + "," + std::to_string(rs[k][5] / m) +
                           "," + std::to_string(rs[k][6] * da) + "\n";
                }
            }
            io::atomic_write(d_out, out);
            return 0;
        }

        if (verify->parsed()) {
            experiments::SuiteConfig cfg;
            cfg.alpha = v_alpha;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.scale = v_scale;
            if (!v_stats.empty() && v_which == "clades") {
                auto reports = experiments::clade_statistics(cfg, v_stats);
                bool ok = true;
                for (auto& r : reports) {
                    std::printf("[%s] %s\n", r.pass ? "PASS" : "FAIL", r.test_id.c_str());
                    io::atomic_write(v_out + "/" + r.test_id + ".json", io::report_to_json(r));
                    ok = ok && (r.pass || r.informational);
                }
                io::atomic_write(v_out + "/summary.csv",
                                 io::reports_summary_csv(reports, io::config_hash(v_stats),
                                                         seed));
                return ok ? 0 : 2;
            }
            return run_verify(v_which, cfg, v_out);
        }

        if (report->parsed()) {
            std::ifstream is(r_in);
            if (!is) throw invalid_input("cannot read " + r_in);
            std::map<std::string, int> col{{"total_mass", 2},      {"block_count", 3},
                                           {"leftmost_mass", 4},   {"largest_mass", 5},
                                           {"diversity_total", 6}};
            if (!col.count(r_column)) throw invalid_input("unknown column " + r_column);
            int want = col[r_column];
            std::vector<double> vals;
            std::string line;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#' || line.rfind("replicate", 0) == 0) continue;
                std::istringstream ls(line);
                std::string tok;
                double level = -1, v = 0;
                for (int c = 0; std::getline(ls, tok, ','); ++c) {
                    if (c == 1) level = std::stod(tok);
                    if (c == want) v = std::stod(tok);
                }
                if (r_level < 0 || std::fabs(level - r_level) < 1e-12) vals.push_back(v);
            }
            if (vals.size() < 2) throw invalid_input("no rows matched");
            io::atomic_write(r_out, io::svg_histogram(vals, 40, r_column));
            std::fprintf(stderr, "wrote %s (%zu values)\n", r_out.c_str(), vals.size());
            return 0;
        }
    } catch (const invalid_input& e) {
        std::fprintf(stderr, "ipevo: invalid input: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ipevo: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
