#pragma once

#include <map>
#include <string>

#include "wavelab/models.hpp"
#include "wavelab/reduced.hpp"
#include "wavelab/solver.hpp"

namespace wavelab {

// Line-oriented key = value configuration with [section] headers, '#'
// comments, whitespace-separated list values; repeated keys accumulate.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    int get_int_or(const std::string& section, const std::string& key,
                   int fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key,
                     bool fallback) const;
    std::vector<double> get_doubles(const std::string& section,
                                    const std::string& key) const;
    std::vector<std::string> get_all(const std::string& section,
                                     const std::string& key) const;

private:
    // section -> key -> values in file order
    std::map<std::string, std::map<std::string, std::vector<std::string>>> kv_;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

// Least-squares fit of log(y) against log(x); entries with y <= 0 dropped.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Restart recipe for the full solver: marches one-window picard solves of
// length `window`, returning `keep` stored snapshots.
Trajectory solve_windowed(const EvolutionProblem& prob, double window,
                          int keep = 8, SolverConfig cfg = {});

struct ReportRow {
    std::string measurement;
    double beta = 0.0;
    double rho = 0.0;
    double value = 0.0;
};

struct MeasurementFit {
    std::string measurement;
    FitResult fit;
    double slope_threshold = 0.0;
    double r2_threshold = 0.95;
    bool pass = false;
};

struct ScalingReport {
    std::vector<ReportRow> rows;
    std::vector<MeasurementFit> fits;
    std::vector<std::string> notes;
    bool all_pass() const {
        for (auto& f : fits)
            if (!f.pass) return false;
        return !fits.empty();
    }
};

struct ExperimentConfig {
    Config cfg;
    std::string out_dir;
    uint64_t seed = 1;
    std::string measurement;
};

ExperimentConfig load_experiment(const std::string& path);

// Executes the configured sweep: synthesize -> solve -> measure per (beta,
// rho) point, aggregate, fit slopes.  Deterministic for a fixed config+seed.
ScalingReport run_experiment(const ExperimentConfig& exp);

// report.csv (columns measurement,beta,rho,value,slope,intercept,r2,pass),
// report.txt summary and per-measurement log10-log10 .dat plot files.
void emit_report(const ScalingReport& report, const std::string& dir);

// Loads report.csv back (used by the `report` subcommand).
ScalingReport load_report_csv(const std::string& path);

std::string report_text_summary(const ScalingReport& report);

// worker cap from WAVELAB_THREADS (>= 1)
int worker_count();

// Reduction-ladder comparison: measures the configured level gaps on the
// (beta, rho) product of the configured lists.
struct LadderPoint {
    std::string level_a;
    std::string level_b;
    double rho = 0.0;
    double beta = 0.0;
    double gap = 0.0;
};

std::vector<LadderPoint> run_ladder(const Config& cfg);

}  // namespace wavelab
