#pragma once

#include <string>
#include <utility>
#include <vector>

#include "msde/cutoff.hpp"
#include "msde/estimators.hpp"
#include "msde/malliavin.hpp"
#include "msde/model.hpp"
#include "msde/paths.hpp"

namespace msde {

/// Round-trip-safe decimal rendering (17 significant digits); all CSV
/// writers use it so identical numbers always produce identical bytes.
std::string fmt_double(double v);

struct OracleRow {
  std::string check;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

/// Header: level,t,p,estimate,stderr,bound. Writes the centered or the raw
/// moment columns of each report; bounds (when given) holds one bound curve
/// per report, and missing or short curves render as nan.
void write_moments_csv(const std::string& path,
                       const std::vector<MomentReport>& reports, bool centered,
                       const std::vector<std::vector<double>>* bounds);

/// Header: n,p,gap,stderr,settled_fraction.
void write_convergence_csv(const std::string& path,
                           const ConvergenceReport& rep);

/// Header: r,t,i,j,value. Full r range at each listed output index.
void write_first_field_csv(const std::string& path,
                           const FirstDerivField& field,
                           const std::vector<long>& t_indices);

/// Header: r,tau,t,i,j,k,value. Pairs are subsampled with the given stride.
void write_second_field_csv(const std::string& path,
                            const SecondDerivField& field, long pair_stride);

/// Header: seed,t,x1..xd.
void write_paths_csv(const std::string& path,
                     const std::vector<PathSolution>& paths);

/// Header: seed,k,t,dw1..dwd (t is the left endpoint of step k).
void write_noise_csv(const std::string& path,
                     const std::vector<NoisePath>& noises);

/// Header: n,radius,phi,dphi,d2phi. Radial sweep 0 .. 2.5 n^xi per level;
/// dphi and d2phi are the first-axis gradient and Hessian components, which
/// equal the radial profile derivatives on the axis.
void write_phi_profile_csv(const std::string& path, const CutoffFamily& family,
                           const std::vector<int>& levels,
                           int points_per_level);

/// Header: check,passed,violations,samples.
void write_hypothesis_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, HypothesisReport>>& checks);

/// Header: key,value. One row per measurement, plus a final "passed" row.
void write_certification_csv(const std::string& path,
                             const HypothesisReport& rep);

/// Header: check,value,threshold,passed.
void write_oracles_csv(const std::string& path,
                       const std::vector<OracleRow>& rows);

}  // namespace msde
