#include "ibbt/linalg.hpp"

#include <cmath>

namespace ibbt {

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

double min_eigenvalue(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Mat clamp_psd(const Mat& m) {
  Mat s = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  if (es.eigenvalues().minCoeff() >= 0.0) return s;
  Vec ev = es.eigenvalues().cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

bool loewner_leq(const Mat& a, const Mat& b, double eps) {
  return min_eigenvalue(b - a) >= -eps;
}

Mat psd_factor(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(m));
  Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace ibbt
