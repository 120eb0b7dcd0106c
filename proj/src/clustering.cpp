#include "mlvsbm/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlvsbm/network.hpp"

namespace mlvsbm {

namespace {

double sq_dist(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  return (a - b).squaredNorm();
}

struct KmeansRun {
  std::vector<int> labels;
  double wcss = std::numeric_limits<double>::infinity();
};

KmeansRun kmeans_once(const Eigen::MatrixXd& x, int k, Rng& rng, int max_iter) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXd centers(k, x.cols());

  // k-means++ seeding
  centers.row(0) = x.row(static_cast<int>(rng.uniform_below(n)));
  Eigen::VectorXd d2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], sq_dist(x.row(i), centers.row(c - 1)));
    }
    if (d2.sum() > 0.0) {
      centers.row(c) = x.row(rng.categorical(d2));
    } else {
      centers.row(c) = x.row(static_cast<int>(rng.uniform_below(n)));
    }
  }

  std::vector<int> labels(n, 0);
  for (int it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = sq_dist(x.row(i), centers.row(0));
      for (int c = 1; c < k; ++c) {
        const double d = sq_dist(x.row(i), centers.row(c));
        if (d < bd) { bd = d; best = c; }
      }
      if (labels[i] != best) { labels[i] = best; changed = true; }
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (int i = 0; i < n; ++i) {
      sums.row(labels[i]) += x.row(i);
      counts[labels[i]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0.0) {
        centers.row(c) = sums.row(c) / counts[c];
      } else {
        // revive an empty cluster at the point farthest from its center
        int far = 0; double fd = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d = sq_dist(x.row(i), centers.row(labels[i]));
          if (d > fd) { fd = d; far = i; }
        }
        centers.row(c) = x.row(far);
        changed = true;
      }
    }
    if (!changed) break;
  }

  KmeansRun run;
  run.labels = labels;
  run.wcss = 0.0;
  for (int i = 0; i < n; ++i) run.wcss += sq_dist(x.row(i), centers.row(labels[i]));
  return run;
}

std::vector<int> compact_labels(const std::vector<int>& raw) {
  std::vector<int> remap(raw.size(), -1);
  std::vector<int> out(raw.size());
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    int& m = remap[static_cast<std::size_t>(raw[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return out;
}

}  // namespace

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, Rng& rng,
                        int n_restarts, int max_iter) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw ValidationError("kmeans: need 1 <= k <= n");
  if (k == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);
  KmeansRun best;
  for (int r = 0; r < n_restarts; ++r) {
    KmeansRun run = kmeans_once(points, k, rng, max_iter);
    if (run.wcss < best.wcss) best = std::move(run);
  }
  return best.labels;
}

std::vector<int> ward_cut(const Eigen::MatrixXd& points, int k) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw ValidationError("ward_cut: need 1 <= k <= n");

  std::vector<int> parent(n);
  std::vector<double> size(n, 1.0);
  std::vector<bool> active(n, true);
  for (int i = 0; i < n; ++i) parent[i] = i;

  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // Ward merge cost for singletons is half the squared distance
      d(i, j) = d(j, i) = 0.5 * sq_dist(points.row(i), points.row(j));
    }
  }

  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i;

  for (int merges = 0; merges < n - k; ++merges) {
    int ba = -1, bb = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (int b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        if (d(a, b) < bd) { bd = d(a, b); ba = a; bb = b; }
      }
    }
    // Lance-Williams update of merge costs toward the new cluster ba
    for (int c = 0; c < n; ++c) {
      if (!active[c] || c == ba || c == bb) continue;
      const double na = size[ba], nb = size[bb], nc = size[c];
      const double v = ((na + nc) * d(ba, c) + (nb + nc) * d(bb, c) - nc * d(ba, bb)) /
                       (na + nb + nc);
      d(ba, c) = d(c, ba) = v;
    }
    size[ba] += size[bb];
    active[bb] = false;
    for (int i = 0; i < n; ++i) {
      if (labels[i] == bb) labels[i] = ba;
    }
  }
  return compact_labels(labels);
}

InitMethod init_method_from_string(const std::string& s) {
  if (s == "spectral") return InitMethod::spectral;
  if (s == "hierarchical") return InitMethod::hierarchical;
  if (s == "random") return InitMethod::random;
  if (s == "given") return InitMethod::given;
  throw ValidationError("unknown init method '" + s + "'");
}

std::string to_string(InitMethod m) {
  switch (m) {
    case InitMethod::spectral: return "spectral";
    case InitMethod::hierarchical: return "hierarchical";
    case InitMethod::random: return "random";
    case InitMethod::given: return "given";
  }
  return "?";
}

std::vector<int> init_clustering(const Eigen::MatrixXd& matrix, int k,
                                 InitMethod method, std::uint64_t seed) {
  const int n = static_cast<int>(matrix.rows());
  if (k > n) throw ValidationError("init_clustering: k exceeds number of nodes");
  if (k < 1) throw ValidationError("init_clustering: k must be >= 1");
  if (k == 1) return std::vector<int>(static_cast<std::size_t>(n), 0);
  Rng rng(seed);

  switch (method) {
    case InitMethod::random: {
      std::vector<int> labels(static_cast<std::size_t>(n));
      for (auto& l : labels) l = static_cast<int>(rng.uniform_below(k));
      return labels;
    }
    case InitMethod::hierarchical: {
      if (matrix.cols() == n) {
        Eigen::MatrixXd profile(n, 2 * n);
        profile << matrix, matrix.transpose();
        return ward_cut(profile, k);
      }
      return ward_cut(matrix, k);
    }
    case InitMethod::spectral: {
      if (matrix.cols() != n) {
        throw ValidationError("init_clustering: spectral needs a square matrix");
      }
      Eigen::MatrixXd b = 0.5 * (matrix + matrix.transpose());
      Eigen::VectorXd deg = b.rowwise().sum();
      const double reg = deg.mean();
      if (!(reg > 0.0)) {
        // empty graph: nothing to embed
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (auto& l : labels) l = static_cast<int>(rng.uniform_below(k));
        return labels;
      }
      Eigen::VectorXd dinv = (deg.array() + reg).rsqrt();
      Eigen::MatrixXd lap = dinv.asDiagonal() * b * dinv.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
      // eigenvalues ascend; embed on the top-k eigenvectors
      Eigen::MatrixXd embed = es.eigenvectors().rightCols(k);
      return kmeans(embed, k, rng, 20);
    }
    case InitMethod::given:
      throw ValidationError("init_clustering: 'given' requires explicit labels");
  }
  throw ValidationError("init_clustering: bad method");
}

}  // namespace mlvsbm
