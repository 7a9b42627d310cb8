#include "creditbench/tree.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "creditbench/errors.hpp"
#include "creditbench/random.hpp"

namespace creditbench {

namespace {

class Builder {
 public:
  Builder(const Matrix& x, std::span<const double> y, std::span<const double> w, const TreeParams& params, Rng* rng)
      : x_(x), y_(y), w_(w), params_(params), rng_(rng), d_(static_cast<std::size_t>(x.cols())) {
    std::vector<std::uint32_t> active;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] > 0.0) active.push_back(static_cast<std::uint32_t>(i));
    }
    if (active.empty()) throw ModelError("tree training set has no rows with positive weight");
    sorted_.assign(d_, active);
    for (std::size_t f = 0; f < d_; ++f) {
      auto& idx = sorted_[f];
      const auto fi = static_cast<Eigen::Index>(f);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return x_(a, fi) < x_(b, fi); });
    }
    goes_left_.assign(w.size(), 0);
    tmp_.resize(active.size());
    all_features_.resize(d_);
    std::iota(all_features_.begin(), all_features_.end(), std::size_t{0});
    if (params_.mtry > 0 && params_.mtry < d_ && rng_ == nullptr) {
      throw ModelError("feature subsampling needs a random generator");
    }
  }

  std::vector<TreeNode> run() {
    build(0, sorted_.empty() ? 0 : sorted_[0].size(), 0);
    return std::move(nodes_);
  }

 private:
  std::vector<std::size_t> candidate_features() {
    if (params_.mtry == 0 || params_.mtry >= d_) return all_features_;
    std::vector<std::size_t> f = all_features_;
    for (std::size_t i = 0; i < params_.mtry; ++i) {
      const std::size_t j = i + rng_->index(d_ - i);
      std::swap(f[i], f[j]);
    }
    f.resize(params_.mtry);
    std::sort(f.begin(), f.end());
    return f;
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    double w_sum = 0.0, wy = 0.0, wyy = 0.0;
    for (std::size_t p = begin; p < end; ++p) {
      const auto r = sorted_[0][p];
      w_sum += w_[r];
      wy += w_[r] * y_[r];
      wyy += w_[r] * y_[r] * y_[r];
    }
    const int id = static_cast<int>(nodes_.size());
    TreeNode node;
    node.weight = w_sum;
    node.value = wy / w_sum;
    node.sse = std::max(0.0, wyy - wy * wy / w_sum);
    nodes_.push_back(node);

    if (depth >= params_.max_depth || w_sum < params_.min_split || node.sse <= 1e-12 * w_sum) return id;

    const double parent_score = wy * wy / w_sum;
    double best_gain = 0.0;
    std::size_t best_feature = d_;
    std::size_t best_pos = 0;
    for (std::size_t f : candidate_features()) {
      const auto& idx = sorted_[f];
      const auto fi = static_cast<Eigen::Index>(f);
      double wl = 0.0, sl = 0.0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        const auto r = idx[p];
        wl += w_[r];
        sl += w_[r] * y_[r];
        const double v = x_(r, fi);
        const double next = x_(idx[p + 1], fi);
        if (!(v < next)) continue;
        const double wr = w_sum - wl;
        if (wl < params_.min_leaf || wr < params_.min_leaf) continue;
        const double sr = wy - sl;
        const double gain = sl * sl / wl + sr * sr / wr - parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_pos = p;
        }
      }
    }
    if (best_feature == d_ || best_gain <= 1e-12 * node.sse) return id;

    const auto& bidx = sorted_[best_feature];
    const auto bf = static_cast<Eigen::Index>(best_feature);
    const double lo = x_(bidx[best_pos], bf);
    const double hi = x_(bidx[best_pos + 1], bf);
    double threshold = lo + (hi - lo) / 2.0;
    if (!(threshold < hi)) threshold = lo;
    for (std::size_t p = begin; p < end; ++p) goes_left_[bidx[p]] = p <= best_pos ? 1 : 0;
    const std::size_t mid = best_pos + 1;
    for (std::size_t f = 0; f < d_; ++f) {
      auto& idx = sorted_[f];
      std::size_t l = begin, r = 0;
      for (std::size_t p = begin; p < end; ++p) {
        if (goes_left_[idx[p]]) idx[l++] = idx[p];
        else tmp_[r++] = idx[p];
      }
      std::copy(tmp_.begin(), tmp_.begin() + static_cast<long>(r), idx.begin() + static_cast<long>(l));
    }

    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(best_feature);
    nodes_[static_cast<std::size_t>(id)].threshold = threshold;
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const double> y_;
  std::span<const double> w_;
  const TreeParams& params_;
  Rng* rng_;
  std::size_t d_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> tmp_;
  std::vector<std::size_t> all_features_;
  std::vector<TreeNode> nodes_;
};

double node_risk(const TreeNode& n) { return n.weight * std::min(n.value, 1.0 - n.value); }

}  // namespace

RegressionTree RegressionTree::fit(const Matrix& x, std::span<const double> y, std::span<const double> weights,
                                   const TreeParams& params, Rng* rng) {
  if (static_cast<std::size_t>(x.rows()) != y.size() || y.size() != weights.size()) {
    throw ModelError("tree inputs differ in length");
  }
  if (x.cols() == 0) throw ModelError("tree needs at least one feature");
  RegressionTree tree;
  tree.n_features_ = static_cast<std::size_t>(x.cols());
  tree.nodes_ = Builder(x, y, weights, params, rng).run();
  return tree;
}

int RegressionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    i = row(n.feature) <= n.threshold ? n.left : n.right;
  }
  return i;
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return nodes_[static_cast<std::size_t>(leaf_index(row))].value;
}

Vector RegressionTree::predict(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != n_features_) {
    throw ModelError("tree expects " + std::to_string(n_features_) + " features, got " + std::to_string(x.cols()));
  }
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(x.row(i));
  return out;
}

std::size_t RegressionTree::leaf_count() const {
  std::size_t n = 0;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const auto& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.is_leaf()) {
      ++n;
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return n;
}

int RegressionTree::depth() const {
  int best = 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return best;
}

void RegressionTree::prune_cost_complexity(double cp) {
  if (nodes_.empty()) return;
  const double root_risk = node_risk(nodes_[0]);
  if (root_risk <= 0.0) return;
  const double limit = cp * root_risk;
  std::vector<double> subtree_risk(nodes_.size());
  std::vector<double> leaves(nodes_.size());
  while (true) {
    // Children always follow their parent, so a reverse sweep is bottom-up.
    for (std::size_t i = nodes_.size(); i-- > 0;) {
      const auto& n = nodes_[i];
      if (n.is_leaf()) {
        subtree_risk[i] = node_risk(n);
        leaves[i] = 1.0;
      } else {
        const auto l = static_cast<std::size_t>(n.left), r = static_cast<std::size_t>(n.right);
        subtree_risk[i] = subtree_risk[l] + subtree_risk[r];
        leaves[i] = leaves[l] + leaves[r];
      }
    }
    double weakest = std::numeric_limits<double>::infinity();
    std::size_t victim = nodes_.size();
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const auto i = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      const auto& n = nodes_[i];
      if (n.is_leaf()) continue;
      const double g = (node_risk(n) - subtree_risk[i]) / (leaves[i] - 1.0);
      if (g < weakest) {
        weakest = g;
        victim = i;
      }
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
    if (victim == nodes_.size() || weakest > limit + 1e-12 * root_risk) break;
    nodes_[victim].feature = -1;
    nodes_[victim].left = nodes_[victim].right = -1;
  }

  // Drop unreachable nodes, keeping parents before children.
  std::vector<TreeNode> kept;
  std::function<int(int)> copy = [&](int i) -> int {
    const int id = static_cast<int>(kept.size());
    kept.push_back(nodes_[static_cast<std::size_t>(i)]);
    if (!kept.back().is_leaf()) {
      const int l = copy(nodes_[static_cast<std::size_t>(i)].left);
      const int r = copy(nodes_[static_cast<std::size_t>(i)].right);
      kept[static_cast<std::size_t>(id)].left = l;
      kept[static_cast<std::size_t>(id)].right = r;
    }
    return id;
  };
  copy(0);
  nodes_ = std::move(kept);
}

void RegressionTree::save(std::ostream& out) const {
  out << "tree " << n_features_ << ' ' << nodes_.size() << '\n' << std::setprecision(17);
  for (const auto& n : nodes_) {
    out << n.feature << ' ' << n.threshold << ' ' << n.left << ' ' << n.right << ' ' << n.value << ' ' << n.weight
        << ' ' << n.sse << '\n';
  }
}

RegressionTree RegressionTree::load(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  RegressionTree t;
  if (!(in >> tag >> t.n_features_ >> count) || tag != "tree") throw ModelError("malformed tree record");
  t.nodes_.resize(count);
  for (auto& n : t.nodes_) {
    if (!(in >> n.feature >> n.threshold >> n.left >> n.right >> n.value >> n.weight >> n.sse)) {
      throw ModelError("truncated tree record");
    }
  }
  return t;
}

std::vector<double> bootstrap_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) w[rng.index(n)] += 1.0;
  return w;
}

}  // namespace creditbench
