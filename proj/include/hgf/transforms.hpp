#pragma once

#include <cstdint>
#include <string>

#include "hgf/framelets.hpp"

namespace hgf {

// Framelet coefficients of a d-column signal, rows ordered like the columns of F.
struct Coefficients {
  int j0 = 1;
  Eigen::MatrixXd x;  // N_{j0} x d scaling coefficients
  Eigen::MatrixXd y;  // (M_G - N_{j0}) x d framelet coefficients
  std::int64_t ops = 0;

  Eigen::Index columns() const { return x.cols(); }
};

// Bottom-up pass through C = [p, B^T]; equals F^T f without forming F.
Coefficients decompose(const HierarchyTree& t, const Signal& f, int j0);

// Top-down pass r = x p^T + y^T B. `ops`, if given, receives the operation count.
Signal reconstruct(const HierarchyTree& t, const Coefficients& c, std::int64_t* ops = nullptr);

// j = 0: Phi_1^T Phi_1 X; j >= 1: Psi_j^T Psi_j X. Needs a system built with j0 = 1.
Signal project_level(const FrameletSystem& s, int j, const Signal& X);

struct SparsityReport {
  int signal_nonzeros = 0;
  int framelet_nonzeros = 0;
  int scaling_nonzeros = 0;
  int levels = 0;        // K
  int max_children = 0;  // h
  long long framelet_bound = 0;  // (K - 1)(h - 1) ||f||_0

  bool passed() const { return framelet_nonzeros <= framelet_bound && scaling_nonzeros <= signal_nonzeros; }
};

SparsityReport sparsity_report(const HierarchyTree& t, const Signal& f, int j0, double eps = 1e-12);

std::string coefficients_to_json(const HierarchyTree& t, const Coefficients& c);
Coefficients coefficients_from_json(const HierarchyTree& t, const std::string& text);

}  // namespace hgf
