#pragma once

// Command-line front end: analyze, simulate, optimize and compare, writing
// fixed-format CSV.
//
// Exit codes: 0 success, 2 unparseable arguments or config file, 3 a value
// rejected by validation, 4 an I/O failure, 1 anything else.
//
// A config file holds one `key=value` per line, keys spelled like the long
// flags (`command=simulate`, `dmax=1000`, `source=uniform:0,1`, ...). Flags
// given on the command line override the file; a repeatable flag given on the
// command line replaces every file entry for that key.

#include "ajscc/analytic.hpp"
#include "ajscc/curve.hpp"
#include "ajscc/dist.hpp"
#include "ajscc/mc.hpp"
#include "ajscc/opt.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ajscc::cli {

/// Unusable arguments or config file content (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A file could not be read or written (exit 4).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kCommands[] = {"analyze", "simulate", "optimize", "compare"};

struct RunConfig {
    std::string command;
    std::vector<double> dmax{1000.0};
    std::vector<double> snr_db;
    std::vector<double> sigma;
    int n = 3;
    std::vector<double> ranges;
    std::vector<int> levels;
    std::string l_range;
    std::vector<std::string> sources;
    std::string sensor = "analog";
    std::vector<int> nbits;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::string mode = "high";
    bool case_weighted = false;
    bool equal_l = false;
    bool trend = false;
    std::vector<int> dims;
    std::string out;
    std::string cases_out;
    int precision = 9;
};

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ',';
        if constexpr (std::is_floating_point_v<T>) s += shortest(values[i]);
        else s += std::to_string(values[i]);
    }
    return s;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool is_command(std::string_view s) {
    return std::find(std::begin(kCommands), std::end(kCommands), s) != std::end(kCommands);
}

inline constexpr std::string_view kFlagKeys[] = {"case-weighted", "equal-l", "trend"};

}  // namespace detail

/// Serializes a RunConfig in the config-file format.
inline std::string to_config_text(const RunConfig& c) {
    using detail::join;
    std::ostringstream o;
    o << "command=" << c.command << '\n';
    o << "dmax=" << join(c.dmax) << '\n';
    if (!c.snr_db.empty()) o << "snr=" << join(c.snr_db) << '\n';
    if (!c.sigma.empty()) o << "sigma=" << join(c.sigma) << '\n';
    o << "n=" << c.n << '\n';
    if (!c.ranges.empty()) o << "ranges=" << join(c.ranges) << '\n';
    if (!c.levels.empty()) o << "levels=" << join(c.levels) << '\n';
    if (!c.l_range.empty()) o << "l-range=" << c.l_range << '\n';
    for (const auto& s : c.sources) o << "source=" << s << '\n';
    o << "sensor=" << c.sensor << '\n';
    if (!c.nbits.empty()) o << "nbits=" << join(c.nbits) << '\n';
    o << "trials=" << c.trials << '\n';
    o << "seed=" << c.seed << '\n';
    o << "mode=" << c.mode << '\n';
    o << "case-weighted=" << (c.case_weighted ? "true" : "false") << '\n';
    o << "equal-l=" << (c.equal_l ? "true" : "false") << '\n';
    o << "trend=" << (c.trend ? "true" : "false") << '\n';
    if (!c.dims.empty()) o << "dims=" << join(c.dims) << '\n';
    if (!c.out.empty()) o << "out=" << c.out << '\n';
    if (!c.cases_out.empty()) o << "cases-out=" << c.cases_out << '\n';
    o << "precision=" << c.precision << '\n';
    return o.str();
}

/// Config-file entries as (key, value) pairs in file order.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string line = detail::trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        entries.emplace_back(detail::trim(std::string_view(line).substr(0, eq)),
                             detail::trim(std::string_view(line).substr(eq + 1)));
    }
    return entries;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write to '" + path + "' failed");
}

namespace detail {

// Turns config-file entries into flag tokens, dropping keys the command line
// sets itself.
inline std::vector<std::string> config_tokens(const std::vector<std::pair<std::string, std::string>>& entries,
                                              const std::vector<std::string>& user_args, std::string& command) {
    const auto user_sets = [&](const std::string& key) {
        const std::string flag = "--" + key;
        return std::any_of(user_args.begin(), user_args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    std::vector<std::string> tokens;
    for (const auto& [key, value] : entries) {
        if (key == "command") {
            if (command.empty()) command = value;
            continue;
        }
        if (key == "config") throw UsageError("config files cannot include other config files");
        if (user_sets(key)) continue;
        const bool flag = std::find(std::begin(kFlagKeys), std::end(kFlagKeys), key) != std::end(kFlagKeys);
        if (flag) {
            if (value == "true") tokens.push_back("--" + key);
            else if (value != "false") throw UsageError("config key '" + key + "' expects true or false");
            continue;
        }
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    return tokens;
}

}  // namespace detail

struct ParsedArgs {
    RunConfig config;
    std::string save_config;
    bool help = false;
    std::string help_text;
};

/// Parses argv (without running anything). Throws UsageError or IoError.
inline ParsedArgs parse_args(const std::vector<std::string>& args) {
    ParsedArgs parsed;
    RunConfig& c = parsed.config;

    std::vector<std::string> rest;
    std::string command;
    std::string config_path;
    std::size_t i = 0;
    if (!args.empty() && detail::is_command(args[0])) {
        command = args[0];
        i = 1;
    }
    for (; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a path");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    std::vector<std::string> tokens;
    if (!config_path.empty()) tokens = detail::config_tokens(parse_config_text(read_file(config_path)), rest, command);
    tokens.insert(tokens.end(), rest.begin(), rest.end());

    CLI::App app{"Rectangular AJSCC mapping: analytic MSE, simulation and level search", "ajscc"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    const auto all = CLI::MultiOptionPolicy::TakeAll;
    app.add_option("--dmax", c.dmax, "Curve length D_max (repeatable, comma list)")->delimiter(',')->multi_option_policy(all);
    auto* snr = app.add_option("--snr", c.snr_db, "SNR in dB against mean mapped power (repeatable)")
                    ->delimiter(',')
                    ->multi_option_policy(all);
    auto* sigma = app.add_option("--sigma", c.sigma, "Explicit noise standard deviation (repeatable)")
                      ->delimiter(',')
                      ->multi_option_policy(all);
    snr->excludes(sigma);
    app.add_option("--n", c.n, "Number of source dimensions");
    app.add_option("--ranges", c.ranges, "Source ranges R_1..R_N (default all 1)")->delimiter(',')->multi_option_policy(all);
    app.add_option("--levels", c.levels, "Level counts L_1..L_{N-1}")->delimiter(',')->multi_option_policy(all);
    app.add_option("--l-range", c.l_range, "Level sweep min:max[:step], every dimension");
    app.add_option("--source", c.sources, "Per-dimension law uniform:lo,hi or dbg:lo,hi,mu,sigma (repeat per dimension)")
        ->multi_option_policy(all);
    app.add_option("--sensor", c.sensor, "analog or digital")->check(CLI::IsMember({"analog", "digital"}));
    app.add_option("--nbits", c.nbits, "ADC resolution (repeatable)")->delimiter(',')->multi_option_policy(all);
    app.add_option("--trials", c.trials, "Monte Carlo trials");
    app.add_option("--seed", c.seed, "Monte Carlo seed");
    app.add_option("--mode", c.mode, "high, low or mc")->check(CLI::IsMember({"high", "low", "mc"}));
    app.add_flag("--case-weighted", c.case_weighted, "Weight crossing penalties by case frequency (low mode)");
    app.add_flag("--equal-l", c.equal_l, "Constrain all level counts to one value");
    app.add_flag("--trend", c.trend, "optimize: report the argmin per (D_max, SNR) or per N");
    app.add_option("--dims", c.dims, "optimize --trend --equal-l: dimension counts to scan")->delimiter(',')->multi_option_policy(all);
    app.add_option("--out", c.out, "CSV output path (default stdout)");
    app.add_option("--cases-out", c.cases_out, "simulate: per-case crossing counts CSV");
    app.add_option("--precision", c.precision, "Significant digits in CSV output")->check(CLI::Range(1, 17));
    app.add_option("--save-config", parsed.save_config, "Write the effective configuration to this file");
    app.fallthrough();
    for (auto name : kCommands) app.add_subcommand(std::string(name))->fallthrough();

    std::vector<std::string> reversed;
    if (!command.empty()) reversed.push_back(command);
    reversed.insert(reversed.end(), tokens.begin(), tokens.end());
    std::reverse(reversed.begin(), reversed.end());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        parsed.help = true;
        parsed.help_text = app.help();
        return parsed;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    if (command.empty()) throw UsageError("no command given (analyze, simulate, optimize or compare)");
    if (!detail::is_command(command)) throw UsageError("unknown command '" + command + "'");
    c.command = command;
    return parsed;
}

namespace detail {

struct NoisePoint {
    std::optional<double> snr_db;
    SnrSpec spec;
};

inline std::vector<NoisePoint> noise_points(const RunConfig& c) {
    std::vector<NoisePoint> pts;
    if (!c.sigma.empty()) {
        for (double s : c.sigma) pts.push_back({std::nullopt, SnrSpec::explicit_sigma(s)});
    } else if (!c.snr_db.empty()) {
        for (double s : c.snr_db) pts.push_back({s, SnrSpec::mean_mapped_power(s)});
    } else {
        pts.push_back({30.0, SnrSpec::mean_mapped_power(30.0)});
    }
    return pts;
}

inline std::vector<double> ranges_of(const RunConfig& c) {
    if (c.n < 2 || static_cast<std::size_t>(c.n) > kMaxDims)
        throw std::invalid_argument("--n must be in [2, " + std::to_string(kMaxDims) + "]");
    if (c.ranges.empty()) return std::vector<double>(static_cast<std::size_t>(c.n), 1.0);
    if (c.ranges.size() != static_cast<std::size_t>(c.n))
        throw std::invalid_argument("--ranges needs " + std::to_string(c.n) + " values");
    return c.ranges;
}

inline opt::LevelRange parse_level_range(const std::string& text) {
    opt::LevelRange r;
    int parts[3] = {0, 0, 1};
    std::size_t count = 0, pos = 0;
    while (pos <= text.size() && count < 3) {
        const auto colon = text.find(':', pos);
        const std::string piece = text.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
        auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[count]);
        if (piece.empty() || ec != std::errc() || ptr != piece.data() + piece.size())
            throw UsageError("--l-range expects min:max[:step], got '" + text + "'");
        ++count;
        if (colon == std::string::npos) break;
        pos = colon + 1;
        if (count == 3) throw UsageError("--l-range expects min:max[:step], got '" + text + "'");
    }
    if (count < 2) throw UsageError("--l-range expects min:max[:step], got '" + text + "'");
    r.min = parts[0];
    r.max = parts[1];
    r.step = parts[2];
    opt::validate(r);
    return r;
}

inline std::vector<dist::SourceDistribution> sources_of(const RunConfig& c, const std::vector<double>& ranges) {
    std::vector<dist::SourceDistribution> out;
    if (c.sources.empty()) {
        for (double r : ranges) out.push_back(dist::SourceDistribution::uniform(0.0, r));
        return out;
    }
    if (c.sources.size() != ranges.size())
        throw std::invalid_argument("--source must be given once per dimension (" + std::to_string(ranges.size()) + ")");
    for (const auto& s : c.sources) out.push_back(dist::parse_distribution(s));
    return out;
}

inline Sensor sensor_of(const RunConfig& c) {
    if (c.sensor == "analog") return Sensor::analog();
    if (c.nbits.empty()) throw std::invalid_argument("--sensor digital needs --nbits");
    return Sensor::digital(c.nbits.front());
}

class CsvWriter {
public:
    explicit CsvWriter(int precision) : precision_(precision) {}

    CsvWriter& num(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", precision_, v);
        return cell(buf);
    }
    CsvWriter& integer(long long v) { return cell(std::to_string(v)); }
    CsvWriter& cell(std::string_view s) {
        if (!first_) out_ += ',';
        out_ += s;
        first_ = false;
        return *this;
    }
    CsvWriter& opt_num(const std::optional<double>& v) { return v ? num(*v) : cell(""); }
    void end_row() {
        out_ += '\n';
        first_ = true;
    }
    const std::string& text() const { return out_; }

private:
    int precision_;
    std::string out_;
    bool first_ = true;
};

inline std::vector<std::string> quant_names(std::size_t n_dims) {
    if (n_dims == 3) return {"mse_quant_y", "mse_quant_z"};
    std::vector<std::string> names;
    for (std::size_t k = 2; k <= n_dims; ++k) names.push_back("mse_quant_" + std::to_string(k));
    return names;
}

inline void term_header(CsvWriter& w, std::size_t n_dims) {
    for (std::size_t j = 1; j < n_dims; ++j) w.cell("L" + std::to_string(j));
    w.cell("mse_noise");
    for (const auto& q : quant_names(n_dims)) w.cell(q);
    w.cell("mse_lsc").cell("mse_rsc").cell("mse_adc").cell("mse_total");
}

inline void term_row(CsvWriter& w, const opt::GridPoint& p) {
    for (int l : p.levels) w.integer(l);
    const MseBreakdown& b = p.breakdown;
    w.num(b.noise_term);
    for (double q : b.quant_terms) w.num(q);
    w.num(b.lsc_term).num(b.rsc_term).num(b.adc_term).num(p.mse);
}

inline void mc_header(CsvWriter& w, std::size_t n_dims) {
    for (std::size_t j = 1; j < n_dims; ++j) w.cell("L" + std::to_string(j));
    for (std::size_t k = 1; k <= n_dims; ++k) w.cell("mse_s" + std::to_string(k));
    w.cell("mse_total");
}

inline void mc_row(CsvWriter& w, const opt::GridPoint& p) {
    for (int l : p.levels) w.integer(l);
    w.num(p.breakdown.noise_term);
    for (double q : p.breakdown.quant_terms) w.num(q);
    w.num(p.mse);
}

inline opt::SweepSpec sweep_of(const RunConfig& c, const std::vector<double>& ranges) {
    opt::SweepSpec s;
    s.ranges = ranges;
    s.d_max = c.dmax.front();
    s.sensor = sensor_of(c);
    s.equal_levels = c.equal_l;
    const std::size_t q = ranges.size() - 1;
    if (!c.l_range.empty()) {
        s.levels.assign(c.equal_l ? 1 : q, parse_level_range(c.l_range));
    } else if (!c.levels.empty()) {
        if (c.levels.size() != q) throw std::invalid_argument("--levels needs " + std::to_string(q) + " values");
        s.equal_levels = false;
        for (int l : c.levels) s.levels.push_back({l, l, 1});
    } else {
        throw UsageError("give --levels or --l-range");
    }
    if (c.mode == "high") {
        s.objective = opt::Objective::analytic_high();
    } else if (c.mode == "low") {
        s.objective = opt::Objective::analytic_low();
        s.objective.low.case_weighted = c.case_weighted;
        if (!c.sources.empty()) {
            const auto src = sources_of(c, ranges);
            s.objective.source_s1 = src[0];
            if (src.size() == 3) {
                s.objective.low.source_s2 = src[1];
                s.objective.low.source_s3 = src[2];
            }
        }
    } else {
        s.objective = opt::Objective::monte_carlo(c.trials, c.seed);
        s.objective.sources = sources_of(c, ranges);
        if (c.trials == 0) throw std::invalid_argument("trials must be at least 1");
    }
    return s;
}

inline std::string run_analyze(const RunConfig& c) {
    if (c.mode == "mc") throw UsageError("analyze is analytic; use --mode high or low");
    const auto ranges = ranges_of(c);
    CsvWriter w(c.precision);
    w.cell("d_max").cell("snr_db").cell("sigma_n");
    term_header(w, ranges.size());
    w.end_row();
    for (double d_max : c.dmax)
        for (const auto& np : noise_points(c)) {
            opt::SweepSpec s = sweep_of(c, ranges);
            s.d_max = d_max;
            s.snr = np.spec;
            for (const auto& levels : opt::level_grid(s)) {
                const auto p = opt::evaluate(s, levels);
                const auto config = build_config(ranges.size(), ranges, levels, d_max);
                w.num(d_max).opt_num(np.snr_db).num(analytic::snr_to_sigma(config, np.spec).sigma_n);
                term_row(w, p);
                w.end_row();
            }
        }
    return w.text();
}

inline std::string run_simulate(const RunConfig& c, std::string* cases_csv) {
    if (c.trials == 0) throw std::invalid_argument("trials must be at least 1");
    const auto ranges = ranges_of(c);
    if (c.levels.size() != ranges.size() - 1)
        throw UsageError("simulate needs --levels with " + std::to_string(ranges.size() - 1) + " values");
    const auto sources = sources_of(c, ranges);
    const Sensor sensor = sensor_of(c);
    CsvWriter w(c.precision);
    CsvWriter cases(c.precision);
    w.cell("d_max").cell("snr_db").cell("sigma_n").cell("trials").cell("seed");
    for (std::size_t k = 1; k <= ranges.size(); ++k) w.cell("mse_s" + std::to_string(k));
    w.cell("mse_sum").cell("ci_halfwidth").cell("pr_lsc").cell("pr_rsc").cell("multi_crossings");
    w.end_row();
    cases.cell("d_max").cell("snr_db").cell("sigma_n").cell("label").cell("count").cell("table_mismatches");
    cases.end_row();
    for (double d_max : c.dmax) {
        const auto config = build_config(ranges.size(), ranges, c.levels, d_max);
        for (const auto& np : noise_points(c)) {
            const NoiseModel noise = analytic::snr_to_sigma(config, np.spec);
            const mc::SimulationSpec spec{config, noise, sources, sensor, c.trials, c.seed};
            const auto r = mc::run(spec);
            const auto rates = mc::crossing_rates(r);
            w.num(d_max).opt_num(np.snr_db).num(noise.sigma_n).cell(std::to_string(c.trials)).cell(std::to_string(c.seed));
            for (double m : r.mse_per_dim) w.num(m);
            w.num(r.mse_sum).num(r.ci_halfwidth).num(rates.pr_lsc_hat).num(rates.pr_rsc_hat);
            w.cell(std::to_string(r.multi_crossing_count));
            w.end_row();
            if (ranges.size() == 3)
                for (std::size_t l = 0; l < kCrossingLabelCount; ++l) {
                    cases.num(d_max).opt_num(np.snr_db).num(noise.sigma_n);
                    cases.cell(to_string(static_cast<CrossingLabel>(l))).cell(std::to_string(r.crossing_counts[l]));
                    cases.cell(l < kTabulatedCases ? std::to_string(r.table_mismatch_counts[l]) : "0");
                    cases.end_row();
                }
        }
    }
    if (cases_csv) *cases_csv = cases.text();
    return w.text();
}

inline std::string run_optimize(const RunConfig& c, std::ostream& err) {
    const auto ranges = ranges_of(c);
    const auto noise = noise_points(c);
    CsvWriter w(c.precision);
    if (c.trend && c.equal_l && !c.dims.empty()) {
        if (noise.size() != 1) throw UsageError("--dims scans take one SNR or sigma");
        opt::SweepSpec s = sweep_of(c, ranges);
        std::vector<std::size_t> dims;
        for (int n : c.dims) {
            if (n < 2 || static_cast<std::size_t>(n) > kMaxDims) throw std::invalid_argument("--dims values must be in [2, 16]");
            dims.push_back(static_cast<std::size_t>(n));
        }
        w.cell("n").cell("d_max").cell("snr_db").cell("sigma_n").cell("L").cell("mse_min");
        w.end_row();
        for (const auto& row : opt::optimal_l_vs_dims(s, dims, c.dmax, noise[0].spec, true)) {
            const auto cfg = build_config(row.n_dims, opt::ranges_for(ranges, row.n_dims), row.argmin, row.d_max);
            w.integer(static_cast<long long>(row.n_dims)).num(row.d_max).opt_num(noise[0].snr_db);
            w.num(analytic::snr_to_sigma(cfg, row.snr).sigma_n).integer(row.argmin.front()).num(row.mse_min);
            w.end_row();
        }
        return w.text();
    }
    if (c.trend) {
        opt::SweepSpec s = sweep_of(c, ranges);
        std::vector<SnrSpec> snrs;
        for (const auto& np : noise) snrs.push_back(np.spec);
        w.cell("d_max").cell("snr_db").cell("sigma_n");
        for (std::size_t j = 1; j < ranges.size(); ++j) w.cell("L" + std::to_string(j));
        w.cell("mse_min");
        w.end_row();
        const auto rows = opt::optimal_l_trend(s, c.dmax, snrs);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            const auto cfg = build_config(ranges.size(), ranges, row.argmin, row.d_max);
            w.num(row.d_max).opt_num(noise[i % noise.size()].snr_db).num(analytic::snr_to_sigma(cfg, row.snr).sigma_n);
            for (int l : row.argmin) w.integer(l);
            w.num(row.mse_min);
            w.end_row();
        }
        return w.text();
    }
    if (c.dmax.size() != 1 || noise.size() != 1)
        throw UsageError("optimize takes one --dmax and one SNR or sigma (or --trend)");
    opt::SweepSpec s = sweep_of(c, ranges);
    s.snr = noise[0].spec;
    const auto result = opt::grid_search(s);
    const bool simulated = c.mode == "mc";
    simulated ? mc_header(w, ranges.size()) : term_header(w, ranges.size());
    w.end_row();
    for (const auto& p : result.grid) {
        simulated ? mc_row(w, p) : term_row(w, p);
        w.end_row();
    }
    CsvWriter summary(c.precision);
    summary.cell("argmin");
    for (int l : result.argmin) summary.integer(l);
    summary.num(result.mse_min);
    err << summary.text() << '\n';
    return w.text();
}

inline std::string run_compare(const RunConfig& c) {
    const auto ranges = ranges_of(c);
    if (c.levels.size() != ranges.size() - 1)
        throw UsageError("compare needs --levels with " + std::to_string(ranges.size() - 1) + " values");
    std::vector<int> bits = c.nbits.empty() ? std::vector<int>{3, 5} : c.nbits;
    for (int b : bits) Sensor::digital(b);
    const auto sources = sources_of(c, ranges);
    CsvWriter w(c.precision);
    w.cell("d_max").cell("snr_db").cell("sigma_n").cell("sensor").cell("n_bits").cell("mse_total");
    w.cell("gap_vs_analog").cell("gap_ci_halfwidth").cell("adc_term");
    w.end_row();
    for (double d_max : c.dmax) {
        const auto config = build_config(ranges.size(), ranges, c.levels, d_max);
        for (const auto& np : noise_points(c)) {
            const NoiseModel noise = analytic::snr_to_sigma(config, np.spec);
            const auto lead = [&] { w.num(d_max).opt_num(np.snr_db).num(noise.sigma_n); };
            if (c.mode == "mc") {
                if (c.trials == 0) throw std::invalid_argument("trials must be at least 1");
                const mc::SimulationSpec spec{config, noise, sources, Sensor::analog(), c.trials, c.seed};
                std::optional<double> analog;
                for (int b : bits) {
                    const auto g = mc::paired_gap(spec, b);
                    if (!analog) {
                        analog = g.analog_mse;
                        lead();
                        w.cell("analog").integer(0).num(g.analog_mse).num(0.0).num(0.0).num(0.0);
                        w.end_row();
                    }
                    lead();
                    w.cell("digital").integer(b).num(g.digital_mse).num(g.gap).num(g.gap_ci_halfwidth);
                    w.num(analytic::adc_term(config.range(0), b));
                    w.end_row();
                }
                continue;
            }
            opt::SweepSpec s = sweep_of(c, ranges);
            s.d_max = d_max;
            s.snr = np.spec;
            s.sensor = Sensor::analog();
            const double analog = opt::evaluate(s, c.levels).mse;
            lead();
            w.cell("analog").integer(0).num(analog).num(0.0).num(0.0).num(0.0);
            w.end_row();
            for (int b : bits) {
                s.sensor = Sensor::digital(b);
                const double digital = opt::evaluate(s, c.levels).mse;
                lead();
                w.cell("digital").integer(b).num(digital).num(digital - analog).num(0.0);
                w.num(analytic::adc_term(config.range(0), b));
                w.end_row();
            }
        }
    }
    return w.text();
}

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) out << text;
    else write_file(path, text);
}

}  // namespace detail

/// Runs a parsed configuration, writing CSV to c.out (or `out`).
inline void execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.command == "analyze") {
        detail::emit(c.out, detail::run_analyze(c), out);
    } else if (c.command == "simulate") {
        std::string cases;
        const std::string main = detail::run_simulate(c, c.cases_out.empty() ? nullptr : &cases);
        detail::emit(c.out, main, out);
        if (!c.cases_out.empty()) write_file(c.cases_out, cases);
    } else if (c.command == "optimize") {
        detail::emit(c.out, detail::run_optimize(c, err), out);
    } else {
        detail::emit(c.out, detail::run_compare(c), out);
    }
}

/// Entry point behind the ajscc binary; returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        const ParsedArgs parsed = parse_args(args);
        if (parsed.help) {
            out << parsed.help_text;
            return 0;
        }
        if (!parsed.save_config.empty()) write_file(parsed.save_config, to_config_text(parsed.config));
        execute(parsed.config, out, err);
        return 0;
    } catch (const UsageError& e) {
        err << "ajscc: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "ajscc: " << e.what() << '\n';
        return 4;
    } catch (const std::invalid_argument& e) {
        err << "ajscc: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "ajscc: " << e.what() << '\n';
        return 1;
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace ajscc::cli
