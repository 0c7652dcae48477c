#ifndef MTDS_VERIFY_HPP
#define MTDS_VERIFY_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "mtds/mt_series.hpp"

namespace mtds {

using ojson = nlohmann::ordered_json;

struct FEReport {
    std::string identity;
    std::vector<cplx> point;
    std::string labels;
    cplx lhs{}, rhs{};
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double tol = 0.0;
    bool skipped = false;
    std::string skip_reason;
    bool pass = false;
    ojson params;
};

struct SingularLocusSpec {
    int r = 2;
    std::vector<int> principal_indices; // 1-based slots carrying ones/principal
    double band = 1e-3;
};

struct LocusHit {
    bool on = false;
    std::string witness;
};

// Possible-singularity hyperplanes for principal twists:
//   sum_{a<=h} s_{j_a} + s_{r+1} = h - l (1 - [h/r]), l = 0, 1, 2, ...
LocusHit singular_locus(const SingularLocusSpec& spec, const MtPoint& p);

SingularLocusSpec locus_spec_for(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                                 double band = 1e-3);

FEReport check_lemma_34_1(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                          double tol);
FEReport check_thm_21(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                      double tol);
FEReport check_thm_22(const MtPoint& p, const std::vector<CoefficientSequence>& coeffs,
                      double tol);
FEReport check_thm_12(const MtPoint& p, double tol);
FEReport check_cm(cplx s1, cplx s2, const CoefficientSequence& A, double tol);

// KMT double-L functional equation on the parity-matched hyperplane
// s1 + s2 = 2k+1 (chi1(-1)chi2(-1) = 1) or 2k (product = -1).
// requested_parity: -1 auto, 1 odd plane, 0 even plane (mismatch -> error).
FEReport check_kmt(cplx s1, int q, int chi1_index, int chi2_index, int k, double tol,
                   int requested_parity = -1);

struct GridAxis {
    double start = 0.0, stop = 0.0, step = 1.0;
};

struct GridConfig {
    std::string identity; // lemma34_1 | thm21 | thm22 | thm12 | cm | kmt
    int r = 2;
    std::vector<std::string> coeff_labels;
    std::vector<GridAxis> axes;
    std::vector<std::vector<cplx>> extra_points;
    double tol = 1e-6;
    double band = 1e-3;
    int kmt_q = 5, kmt_chi1 = 2, kmt_chi2 = 2, kmt_k = 2;
    int threads = 0; // 0: automatic (MTDS_THREADS or hardware)
};

struct GridSummary {
    long long points = 0, passed = 0, failed = 0, skipped = 0;
    double max_rel_residual = 0.0;
    double pass_rate = 1.0; // over non-skipped
    double wall_ms = 0.0;
};

std::vector<std::vector<cplx>> expand_grid(const GridConfig& cfg);

std::pair<std::vector<FEReport>, GridSummary> run_grid(const GridConfig& cfg);

ojson report_to_json(const FEReport& rep);
ojson grid_report_json(const GridConfig& cfg, const std::vector<FEReport>& reps,
                       const GridSummary& sum);

} // namespace mtds

#endif
