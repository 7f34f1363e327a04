#pragma once

#include "ibbt/types.hpp"

namespace ibbt {

inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Mat& m);

/// Symmetrizes and raises negative eigenvalues to zero.
Mat clamp_psd(const Mat& m);

/// Loewner check `b - a >= -eps * I`.
bool loewner_leq(const Mat& a, const Mat& b, double eps);

/// Symmetric square root factor F with F * F^T = m, for PSD `m`.
Mat psd_factor(const Mat& m);

}  // namespace ibbt
