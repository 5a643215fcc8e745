// The proof engine: candidate elimination against point counts, the
// exterior-square decomposition, the order-3 twist relation, and report
// emission.
#ifndef K3HECKE_PIPELINE_HPP
#define K3HECKE_PIPELINE_HPP

#include "k3hecke/counting.hpp"
#include "k3hecke/hecke.hpp"

#include <memory>

namespace k3hecke {
namespace pipeline {

using counting::EulerFactor;
using counting::GeometryData;
using hecke::EvalCtx;
using hecke::HeckeCharacter;
using numfield::FieldData;

struct Config {
    std::string fields_path;     // defaults to the build-time data directory
    std::string geometry_path;
    long surface_prime_bound = 60;   // trace comparisons, m <= 2
    long m3_prime_bound = 20;        // t3 comparisons for surfaces
    long curve_prime_bound = 200;    // trace comparisons for curves
    long sigma_prime_count = 50;     // degree-1 primes for the twist relation
    long digits = 120;
    counting::WorkBudget budget;
    bool timings = false;

    Config();
};

struct MatchReport {
    int case_id = 0;
    std::string target;            // "surface", "curve", "psi-prime"
    int candidates_before = 0;     // Galois orbits enumerated
    int candidates_after = 0;      // orbits surviving elimination
    std::string verdict;           // "proved-match", "inconclusive", "no-survivors"
    mpz_class cond_norm;
    std::vector<HeckeCharacter> survivor_orbit;
    long table_prime = 0;
    EulerFactor table_factor;      // integer-certified factor at the table prime
    std::vector<std::string> log;  // per-prime comparison lines
    // part (c) extras
    mpz_class x_slot_cond_norm;
    EulerFactor x_slot_factor;
    std::string x_slot_source;     // "geometry-certified" or "enumeration-certified"
};

struct SigmaReport {
    int case_id = 0;
    bool verified = false;
    int primes_checked = 0;
    double max_residual = 0;
    int rep_x = 0, rep_a = 0;      // successful orbit representatives
    std::vector<std::string> log;
};

class Engine {
public:
    explicit Engine(Config cfg = Config());

    const Config& config() const { return cfg_; }
    const GeometryData& geometry() const { return geometry_; }
    const FieldData& field(int i);
    EvalCtx& ctx(int i);

    // geometric traces (cached): curve t_m and surface transcendental t_m
    long long curve_trace(int i, long p, int m);
    long long surface_trace(int i, long p, int m);

    std::set<long> surface_bad(int i);
    std::set<long> curve_bad(int i);

    MatchReport match_surface(int i);
    MatchReport match_curve(int i);
    MatchReport verify_part_c(int i);
    SigmaReport verify_sigma_relation(int i);

    // machine-readable JSON plus a rendered text table; byte-stable unless
    // cfg.timings is set
    struct ReportBundle {
        std::string json;
        std::string text;
        bool all_verified = false;
    };
    ReportBundle emit_report(const std::set<std::string>& scopes);

    static long table_prime_for(int i);   // 17, 13, 37, 29

private:
    Config cfg_;
    GeometryData geometry_;
    std::map<int, FieldData> fields_;
    std::map<int, std::unique_ptr<EvalCtx>> ctxs_;
    std::map<std::string, long long> trace_cache_;
    std::map<std::string, MatchReport> match_cache_;

    MatchReport run_match(int i, bool curve);
};

std::string default_geometry_path();

} // namespace pipeline
} // namespace k3hecke

#endif
