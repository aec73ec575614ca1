#pragma once

#include <utility>
#include <vector>

#include "rgne/common.hpp"

namespace rgne {

/// Undirected weighted communication graph with Laplacian L = deg - A.
class CommGraph {
 public:
  explicit CommGraph(Mat adjacency) : adj_(std::move(adjacency)) {
    require(adj_.rows() == adj_.cols(), Errc::InvalidArgument,
            "CommGraph: adjacency must be square");
    require(adj_.rows() >= 1, Errc::InvalidArgument, "CommGraph: empty graph");
    require((adj_.array() >= 0.0).all(), Errc::InvalidArgument,
            "CommGraph: negative edge weight");
    require(adj_.diagonal().cwiseAbs().maxCoeff() == 0.0, Errc::InvalidArgument,
            "CommGraph: nonzero diagonal");
    require((adj_ - adj_.transpose()).cwiseAbs().maxCoeff() == 0.0,
            Errc::InvalidArgument, "CommGraph: adjacency not symmetric");
  }

  static CommGraph ring(int n, double weight = 1.0) {
    require(n >= 1, Errc::InvalidArgument, "CommGraph::ring: n >= 1 required");
    Mat a = Mat::Zero(n, n);
    if (n == 2) {
      a(0, 1) = a(1, 0) = weight;
    } else if (n > 2) {
      for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        a(i, j) = a(j, i) = weight;
      }
    }
    return CommGraph(a);
  }

  static CommGraph complete(int n, double weight = 1.0) {
    Mat a = Mat::Constant(n, n, weight);
    a.diagonal().setZero();
    return CommGraph(a);
  }

  int size() const { return static_cast<int>(adj_.rows()); }
  const Mat& adjacency() const { return adj_; }

  Mat laplacian() const {
    Mat l = -adj_;
    l.diagonal() = adj_.rowwise().sum();
    return l;
  }

  std::vector<int> neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < size(); ++j)
      if (j != i && adj_(i, j) > 0.0) out.push_back(j);
    return out;
  }

  bool connected() const {
    const int n = size();
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v) {
        if (!seen[v] && adj_(u, v) > 0.0) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  }

  /// Second-smallest Laplacian eigenvalue; positive iff connected.
  double algebraic_connectivity() const {
    Eigen::SelfAdjointEigenSolver<Mat> es(laplacian());
    require(es.info() == Eigen::Success, Errc::NotConverged,
            "CommGraph: eigensolver failed");
    if (size() < 2) return 0.0;
    return es.eigenvalues()(1);
  }

 private:
  Mat adj_;
};

}  // namespace rgne
