#include "ipevo/io.hpp"

#include "ipevo/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ipevo::io {

using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::string partition_to_json(const IntervalPartition& p, double alpha) {
    json j;
    j["alpha"] = alpha;
    j["total_mass"] = p.total_mass;
    j["truncation_mass"] = p.truncation_mass;
    json blocks = json::array();
    for (const Block& b : p.blocks) blocks.push_back({b.left, b.right});
    j["blocks"] = std::move(blocks);
    if (p.diversity_meta)
        j["diversity"] = *p.diversity_meta;
    else
        j["diversity"] = nullptr;
    if (p.total_diversity) j["total_diversity"] = *p.total_diversity;
    return j.dump();
}

IntervalPartition partition_from_json(const std::string& text, double* alpha_out) {
    json j = json::parse(text);
    IntervalPartition p;
    if (alpha_out && j.contains("alpha")) *alpha_out = j["alpha"].get<double>();
    p.total_mass = j.at("total_mass").get<double>();
    p.truncation_mass = j.value("truncation_mass", 0.0);
    for (const auto& b : j.at("blocks"))
        p.blocks.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    if (j.contains("diversity") && !j["diversity"].is_null())
        p.diversity_meta = j["diversity"].get<std::vector<double>>();
    if (j.contains("total_diversity")) p.total_diversity = j["total_diversity"].get<double>();
    p.check_invariants();
    return p;
}

std::string partition_to_csv(const IntervalPartition& p) {
    std::string out = "index,left,right,length,diversity\n";
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        double d = p.diversity_meta ? (*p.diversity_meta)[i] : 0.0;
        out += std::to_string(i) + "," + fmt_double(p.blocks[i].left) + "," +
               fmt_double(p.blocks[i].right) + "," + fmt_double(p.blocks[i].length()) + "," +
               fmt_double(d) + "\n";
    }
    return out;
}

std::string trace_header(const std::string& cfg_hash, std::uint64_t seed) {
    return "# ipevo " + std::string(kVersion) + " config=" + cfg_hash +
           " seed=" + std::to_string(seed) + "\n";
}

void append_summary_row(std::string& csv, std::size_t replicate, const LevelSummary& s) {
    csv += std::to_string(replicate) + "," + fmt_double(s.level) + "," +
           fmt_double(s.total_mass) + "," + std::to_string(s.block_count) + "," +
           fmt_double(s.leftmost_mass) + "," + fmt_double(s.largest_mass) + "," +
           fmt_double(s.diversity_total) + "\n";
}

void append_trace_rows(std::string& csv, std::size_t replicate, const EvolutionTrace& tr) {
    for (std::size_t k = 0; k < tr.levels.size(); ++k)
        append_summary_row(csv, replicate, summarize(tr.levels[k], tr.states[k]));
}

void append_dp_rows(std::string& csv, std::size_t replicate, const DepoissonizedTrace& tr) {
    for (std::size_t k = 0; k < tr.u_grid.size(); ++k) {
        LevelSummary s = summarize(tr.level_at_u[k], tr.states[k]);
        csv += std::to_string(replicate) + "," + fmt_double(tr.u_grid[k]) + "," +
               fmt_double(tr.level_at_u[k]) + "," + fmt_double(s.total_mass) + "," +
               std::to_string(s.block_count) + "," + fmt_double(s.leftmost_mass) + "," +
               fmt_double(s.largest_mass) + "," + fmt_double(s.diversity_total) + "\n";
    }
}

std::string report_to_json(const stats::TestReport& r) {
    json j;
    j["test_id"] = r.test_id;
    j["alpha"] = r.alpha;
    j["params"] = r.params;
    j["n"] = r.n;
    j["statistic"] = r.statistic;
    j["reference"] = r.reference;
    if (r.p_value) j["p_value"] = *r.p_value;
    if (r.z_score) j["z_score"] = *r.z_score;
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["informational"] = r.informational;
    j["seed"] = r.seed;
    j["runtime_ms"] = r.runtime_ms;
    j["version"] = kVersion;
    return j.dump(2);
}

std::string reports_summary_csv(const std::vector<stats::TestReport>& reports,
                                const std::string& cfg_hash, std::uint64_t seed) {
    // runtime lives in the per-test JSON reports; the summary stays
    // byte-identical across reruns with the same seed
    std::string csv = trace_header(cfg_hash, seed);
    csv += "test_id,pass,p,z,N,holm_pass\n";
    std::vector<double> pvals;
    for (const auto& r : reports) pvals.push_back(r.p_value ? *r.p_value : 1.0);
    auto adj = stats::holm_adjust(pvals);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        bool holm_pass = r.informational || !r.p_value || adj[i] > r.threshold || r.pass;
        csv += r.test_id + "," + (r.pass ? "1" : "0") + "," +
               (r.p_value ? fmt_double(*r.p_value) : "") + "," +
               (r.z_score ? fmt_double(*r.z_score) : "") + "," + std::to_string(r.n) + "," +
               (holm_pass ? "1" : "0") + "\n";
    }
    return csv;
}

std::string config_hash(const std::string& canonical) {
    std::uint64_t h = detail::fnv1a(canonical);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> parse_level_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double start, stop, step;
        char c1, c2;
        std::istringstream is(spec);
        if (!(is >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            throw invalid_input("bad level grid '" + spec + "' (want start:stop:step)");
        for (std::size_t k = 0;; ++k) {
            double y = start + static_cast<double>(k) * step;
            if (y > stop + 1e-9 * step) break;
            out.push_back(std::min(y, stop));
        }
    } else {
        std::istringstream is(spec);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            if (tok.empty()) continue;
            out.push_back(std::stod(tok));
        }
    }
    if (out.empty()) throw invalid_input("empty level grid");
    return out;
}

void atomic_write(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os << content;
    }
    fs::rename(tmp, target);
}

std::string svg_histogram(const std::vector<double>& sample, std::size_t bins,
                          const std::string& title) {
    const double W = 640, H = 400, mx = 50, my = 40;
    std::vector<double> s = sample;
    std::sort(s.begin(), s.end());
    if (s.empty() || bins < 2) return "<svg xmlns='http://www.w3.org/2000/svg'/>";
    double lo = s.front(), hi = s.back();
    if (hi <= lo) hi = lo + 1;
    std::vector<double> counts(bins, 0.0);
    for (double v : s) {
        auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        counts[std::min(k, bins - 1)] += 1;
    }
    double peak = *std::max_element(counts.begin(), counts.end());
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
       << "</text>\n";
    os << "<line x1='" << mx << "' y1='" << H - my << "' x2='" << W - 10 << "' y2='" << H - my
       << "' stroke='black'/>\n";
    os << "<line x1='" << mx << "' y1='" << H - my << "' x2='" << mx
       << "' y2='30' stroke='black'/>\n";
    os << "<polyline fill='none' stroke='steelblue' stroke-width='1.5' points='";
    for (std::size_t k = 0; k < bins; ++k) {
        double x = mx + (W - 10 - mx) * (static_cast<double>(k) + 0.5) / static_cast<double>(bins);
        double y = (H - my) - (H - my - 30) * (counts[k] / peak);
        os << x << "," << y << " ";
    }
    os << "'/>\n";
    os << "<text x='" << mx << "' y='" << H - my + 16 << "' font-size='11'>" << lo
       << "</text>\n";
    os << "<text x='" << W - 60 << "' y='" << H - my + 16 << "' font-size='11'>" << hi
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace ipevo::io
