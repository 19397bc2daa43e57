#pragma once

#include "conefront/pdo.hpp"
#include "conefront/wavefront.hpp"

#include <nlohmann/json.hpp>

namespace conefront {

/// Set-inclusion check A subset of (B union C) up to a dilation of the target
/// by tol_sectors neighboring sectors and tol_cells center steps.
struct InclusionReport {
    std::string case_id;
    int tol_sectors = 1;
    int tol_cells = 1;
    struct Violation {
        Pt x = Pt::Zero();
        int sector = 0;
    };
    std::vector<Violation> violations;
    bool pass = true;
    nlohmann::json to_json() const;
};

InclusionReport check_inclusion(const WavefrontEstimate& A, const WavefrontEstimate& B,
                                const WavefrontEstimate* C_opt, int tol_sectors = 1,
                                int tol_cells = 1);

/// Char-set estimates enter inclusion targets through this adapter.
WavefrontEstimate char_as_estimate(const CharSetEstimate& c, const WavefrontEstimate& geometry);

/// Executable verification cases, one per theorem/example exercised at desk
/// scale. run_case is deterministic given the seed.
struct CaseSpec {
    std::string id = "delta_fl";
    std::uint64_t seed = 20260810;
    Index n1 = 1024;   // d=1 resolution
    Index n2 = 64;     // d=2 resolution per axis
    bool quick = false;  // smaller corpora for smoke runs

    static const std::vector<std::string>& known_ids();
};

struct CaseReport {
    std::string id;
    bool pass = false;
    double seconds = 0.0;
    std::vector<std::string> lines;  // one "ok:"/"FAIL:" line per sub-check
    nlohmann::json details;

    nlohmann::json to_json() const;
};

CaseReport run_case(const CaseSpec& spec);

/// Deterministic SVG rendering of an estimate: position axis (d=1) or plane
/// (d=2) with direction glyphs colored by slope.
void render_wf_svg(const WavefrontEstimate& est, const std::string& path);

// corpus helpers shared by cases and the acceptance suite
std::vector<SampledField> seeded_corpus_1d(const Grid& g, std::uint64_t seed, int count);

}  // namespace conefront
