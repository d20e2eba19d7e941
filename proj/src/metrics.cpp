#include "chaoslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "chaoslab/errors.hpp"

namespace chaoslab {
namespace {

// Static kd-tree over the rows of a matrix, stored implicitly in a
// permutation of row indices.
class KdTree {
 public:
  KdTree(const Matrix& pts, std::size_t begin, std::size_t end) : pts_(pts), dim_(pts.cols) {
    idx_.resize(end - begin);
    std::iota(idx_.begin(), idx_.end(), begin);
    nodes_.reserve(2 * idx_.size() / kLeaf + 2);
    build(0, idx_.size());
  }

  /// Distance to the k-th nearest stored point, skipping row `skip`.
  double kth_distance(std::span<const double> q, int k, std::size_t skip) const {
    std::priority_queue<double> heap;  // squared distances, max on top
    search(0, q, static_cast<std::size_t>(k), skip, heap);
    if (heap.size() < static_cast<std::size_t>(k)) {
      fail(ErrorCode::InvalidArgument, "not enough points for the neighbour count");
    }
    return std::sqrt(heap.top());
  }

 private:
  static constexpr std::size_t kLeaf = 16;
  struct Node {
    std::size_t begin, end;
    int axis;  // -1 for a leaf
    double split;
    int left, right;
  };

  int build(std::size_t b, std::size_t e) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({b, e, -1, 0.0, -1, -1});
    if (e - b <= kLeaf) return id;
    int axis = 0;
    double best = -1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      double lo = pts_(idx_[b], d);
      double hi = lo;
      for (std::size_t i = b; i < e; ++i) {
        lo = std::min(lo, pts_(idx_[i], d));
        hi = std::max(hi, pts_(idx_[i], d));
      }
      if (hi - lo > best) {
        best = hi - lo;
        axis = static_cast<int>(d);
      }
    }
    const std::size_t mid = b + (e - b) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(b),
                     idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(e),
                     [&](std::size_t x, std::size_t y) { return pts_(x, axis) < pts_(y, axis); });
    const double split = pts_(idx_[mid], axis);
    const int l = build(b, mid);
    const int r = build(mid, e);
    nodes_[id].axis = axis;
    nodes_[id].split = split;
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(int id, std::span<const double> q, std::size_t k, std::size_t skip,
              std::priority_queue<double>& heap) const {
    const Node& n = nodes_[id];
    if (n.axis < 0) {
      for (std::size_t i = n.begin; i < n.end; ++i) {
        const std::size_t r = idx_[i];
        if (r == skip) continue;
        double d2 = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
          const double t = q[d] - pts_(r, d);
          d2 += t * t;
        }
        if (heap.size() < k) {
          heap.push(d2);
        } else if (d2 < heap.top()) {
          heap.pop();
          heap.push(d2);
        }
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, k, skip, heap);
    if (heap.size() < k || diff * diff < heap.top()) search(far, q, k, skip, heap);
  }

  const Matrix& pts_;
  std::size_t dim_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
};

constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

double knn_estimate(const Matrix& p, std::size_t pb, std::size_t pe, const Matrix& q,
                    std::size_t qb, std::size_t qe, int k) {
  const KdTree tp(p, pb, pe);
  const KdTree tq(q, qb, qe);
  const double n = static_cast<double>(pe - pb);
  const double m = static_cast<double>(qe - qb);
  const double d = static_cast<double>(p.cols);
  double acc = 0.0;
  for (std::size_t i = pb; i < pe; ++i) {
    const auto x = p.row(i);
    const double rho = tp.kth_distance(x, k, i);
    const double nu = tq.kth_distance(x, k, kNoSkip);
    if (!(rho > 0.0) || !(nu > 0.0)) {
      fail(ErrorCode::DegenerateSample, "zero nearest-neighbour distance (duplicate points)");
    }
    acc += std::log(nu / rho);
  }
  return d * acc / n + std::log(m / (n - 1.0));
}

constexpr double kClip = 1e-8;

}  // namespace

const char* to_string(DivergenceMethod method) noexcept {
  switch (method) {
    case DivergenceMethod::PlugInExact: return "plug-in-exact";
    case DivergenceMethod::Knn: return "knn";
    case DivergenceMethod::QuantileGrid: return "quantile-grid";
  }
  return "plug-in-exact";
}

DivergenceEstimate kl_plug_in(const Matrix& samples, const LogDensityFn& log_p,
                              const LogDensityFn& log_q) {
  const std::size_t n = samples.rows;
  if (n < 2) fail(ErrorCode::InvalidArgument, "plug-in estimate needs at least two samples");
  std::vector<double> diff(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = samples.row(i);
    const double lp = log_p(x);
    const double lq = log_q(x);
    if (!std::isfinite(lp) || !std::isfinite(lq)) {
      fail(ErrorCode::NonFinite, "log-density is not finite at sample " + std::to_string(i));
    }
    diff[i] = lp - lq;
    total += diff[i];
  }
  const double nn = static_cast<double>(n);
  const double mean = total / nn;
  // Leave-one-out means and the jackknife variance.
  double ss = 0.0;
  for (double di : diff) {
    const double loo = (total - di) / (nn - 1.0);
    ss += (loo - mean) * (loo - mean);
  }
  return {mean, std::sqrt((nn - 1.0) / nn * ss), DivergenceMethod::PlugInExact};
}

DivergenceEstimate kl_knn(const Matrix& samples_p, const Matrix& samples_q, int k_neighbors,
                          int n_chunks) {
  if (samples_p.cols != samples_q.cols || samples_p.cols == 0) {
    fail(ErrorCode::InvalidArgument, "sample sets must share a positive dimension");
  }
  if (samples_p.rows < 1000 || samples_q.rows < 1000) {
    fail(ErrorCode::InvalidArgument, "kNN estimate needs at least 1000 points per sample set");
  }
  if (k_neighbors < 1) fail(ErrorCode::InvalidArgument, "k_neighbors must be >= 1");
  if (n_chunks < 2) fail(ErrorCode::InvalidArgument, "need at least two chunks for an error bar");
  const double value =
      knn_estimate(samples_p, 0, samples_p.rows, samples_q, 0, samples_q.rows, k_neighbors);

  std::vector<double> parts;
  const std::size_t b = static_cast<std::size_t>(n_chunks);
  for (std::size_t c = 0; c < b; ++c) {
    const std::size_t pb = samples_p.rows * c / b;
    const std::size_t pe = samples_p.rows * (c + 1) / b;
    const std::size_t qb = samples_q.rows * c / b;
    const std::size_t qe = samples_q.rows * (c + 1) / b;
    parts.push_back(knn_estimate(samples_p, pb, pe, samples_q, qb, qe, k_neighbors));
  }
  const double mean = std::accumulate(parts.begin(), parts.end(), 0.0) / static_cast<double>(b);
  double ss = 0.0;
  for (double v : parts) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(b - 1));
  return {value, sd / std::sqrt(static_cast<double>(b)), DivergenceMethod::Knn};
}

double fisher_information_1d(const RealFn& density_log_grad_p, const RealFn& density_log_grad_q,
                             const RealFn& p_density, const QuadratureSpec& spec) {
  const Window w = find_window(p_density, spec);
  return integrate_on(
      [&](double x) {
        const double p = p_density(x);
        if (p == 0.0) return 0.0;
        const double g = density_log_grad_p(x) - density_log_grad_q(x);
        return g * g * p;
      },
      w, spec);
}

double wasserstein_1d(const RealFn& quantile_p, const RealFn& quantile_q, int order, int panels) {
  if (order != 1 && order != 2) fail(ErrorCode::InvalidArgument, "order must be 1 or 2");
  if (panels < 1) fail(ErrorCode::InvalidArgument, "panels must be >= 1");
  static const double t_lo =
      find_root([](double t) { return normal_cdf(t) - kClip; }, {-10.0, 0.0}, 1e-15);
  const double t_hi = -t_lo;
  static const GaussLegendreRule gl = gauss_legendre(8);

  auto cost = [&](double u) {
    const double d = std::fabs(quantile_p(u) - quantile_q(u));
    if (!std::isfinite(d)) fail(ErrorCode::NonFinite, "quantile function is not finite");
    return order == 1 ? d : d * d;
  };
  const double h = (t_hi - t_lo) / panels;
  double body = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = t_lo + h * (p + 0.5);
    double s = 0.0;
    for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
      const double t = mid + 0.5 * h * gl.nodes[j];
      s += gl.weights[j] * cost(normal_cdf(t)) * normal_pdf(t);
    }
    body += 0.5 * h * s;
  }
  // The rule above integrates the density of t over [t_lo, t_hi] to 1 - 2 kClip.
  return body + kClip * (cost(kClip) + cost(1.0 - kClip));
}

}  // namespace chaoslab
