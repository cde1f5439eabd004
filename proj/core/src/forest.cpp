#include "pcm/error.hpp"
#include "pcm/regress.hpp"

#include <algorithm>
#include <numeric>

namespace pcm {

namespace {

struct Node {
  Index feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;
};

using Tree = std::vector<Node>;

double predict_tree(const Tree& tree, const Matrix& design, Index row) {
  std::size_t at = 0;
  while (tree[at].feature >= 0) {
    const auto& node = tree[at];
    at = static_cast<std::size_t>(design(row, node.feature) <= node.threshold ? node.left
                                                                              : node.right);
  }
  return tree[at].value;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, const ForestSpec& params, RngStream::Engine& rng)
      : x_(x), y_(y), params_(params), rng_(rng) {
    const auto p = static_cast<std::size_t>(x.cols());
    mtry_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(p) * params.mtry_fraction));
    mtry_ = std::min(mtry_, p);
    features_.resize(p);
    std::iota(features_.begin(), features_.end(), Index{0});
  }

  Tree build(std::vector<Index> rows) {
    Tree tree;
    grow(tree, rows, 0, rows.size(), 0);
    return tree;
  }

 private:
  std::int32_t grow(Tree& tree, std::vector<Index>& rows, std::size_t begin, std::size_t end,
                    int depth) {
    const auto at = static_cast<std::int32_t>(tree.size());
    tree.emplace_back();
    const std::size_t count = end - begin;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += y_(rows[i]);
    tree[static_cast<std::size_t>(at)].value = sum / static_cast<double>(count);

    const auto min_leaf = static_cast<std::size_t>(params_.min_leaf);
    if (count < 2 * min_leaf) return at;
    if (params_.max_depth > 0 && depth >= params_.max_depth) return at;

    // Partial Fisher-Yates: the first mtry entries become this node's candidates.
    for (std::size_t k = 0; k < mtry_; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, features_.size() - 1);
      std::swap(features_[k], features_[pick(rng_)]);
    }

    double best_gain = 0.0;
    Index best_feature = -1;
    double best_threshold = 0.0;
    const double parent = sum * sum / static_cast<double>(count);
    std::vector<Index> order(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                             rows.begin() + static_cast<std::ptrdiff_t>(end));
    for (std::size_t k = 0; k < mtry_; ++k) {
      const Index f = features_[k];
      std::sort(order.begin(), order.end(),
                [&](Index a, Index b) { return x_(a, f) < x_(b, f); });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < count; ++i) {
        left_sum += y_(order[i]);
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf) continue;
        if (count - n_left < min_leaf) break;
        const double lo = x_(order[i], f);
        const double hi = x_(order[i + 1], f);
        if (!(lo < hi)) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                            right_sum * right_sum / static_cast<double>(count - n_left) - parent;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = lo + 0.5 * (hi - lo);
        }
      }
    }
    // Rounding can make a zero gain look marginally positive on constant nodes.
    if (best_feature < 0 || best_gain <= 1e-12 * (std::abs(parent) + 1.0)) return at;

    const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows.begin() + static_cast<std::ptrdiff_t>(end),
                                    [&](Index r) { return x_(r, best_feature) <= best_threshold; });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const auto left = grow(tree, rows, begin, split, depth + 1);
    const auto right = grow(tree, rows, split, end, depth + 1);
    auto& node = tree[static_cast<std::size_t>(at)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left;
    node.right = right;
    return at;
  }

  const Matrix& x_;
  const Vector& y_;
  const ForestSpec& params_;
  RngStream::Engine& rng_;
  std::size_t mtry_ = 1;
  std::vector<Index> features_;
};

struct ForestImpl final : FittedModel::Impl {
  std::vector<Tree> trees;

  Vector predict(const Matrix& design) const override {
    Vector out = Vector::Zero(design.rows());
    for (Index i = 0; i < design.rows(); ++i) {
      double s = 0.0;
      for (const auto& tree : trees) s += predict_tree(tree, design, i);
      out(i) = s / static_cast<double>(trees.size());
    }
    return out;
  }
};

}  // namespace

FittedModel fit_forest(const Matrix& design, const Vector& y, const ForestSpec& params,
                       const RngStream& stream) {
  if (design.rows() != y.size() || y.size() < 1) {
    throw InvalidArgument("fit_forest: design and y disagree in length");
  }
  if (params.n_trees < 1 || params.min_leaf < 1 ||
      !(params.mtry_fraction > 0 && params.mtry_fraction <= 1) || params.max_depth < 0) {
    throw InvalidArgument("fit_forest: parameters out of range");
  }
  // Fewer than 2*min_leaf rows is not an error here: every tree is a single
  // leaf. Pipelines reject that configuration up front via check_sample_size.
  const Index n = y.size();
  if (detail::is_constant(y)) return detail::constant_model(y(0), design.cols(), n);

  auto impl = std::make_shared<ForestImpl>();
  impl->trees.reserve(static_cast<std::size_t>(params.n_trees));
  for (int t = 0; t < params.n_trees; ++t) {
    auto rng = stream.derive(static_cast<std::uint64_t>(t)).engine();
    std::vector<Index> rows(static_cast<std::size_t>(n));
    if (params.bootstrap) {
      std::uniform_int_distribution<Index> draw(0, n - 1);
      for (auto& r : rows) r = draw(rng);
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
    }
    TreeBuilder builder(design, y, params, rng);
    impl->trees.push_back(builder.build(std::move(rows)));
  }
  Vector fitted = impl->predict(design);
  FitDiagnostics diag;
  diag.iterations = params.n_trees;
  return FittedModel(std::move(impl), design.cols(), std::move(fitted)).with_diagnostics(diag);
}

}  // namespace pcm
