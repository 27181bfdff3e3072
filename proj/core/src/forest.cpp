#include "ctp/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "ctp/error.hpp"
#include "ctp/log.hpp"

namespace ctp::rf {

void Dataset::add(std::span<const double> x, int y) {
  if (labels_.empty() && dim_ == 0) dim_ = x.size();
  if (x.size() != dim_) {
    throw DimensionMismatch("row of length " + std::to_string(x.size()) +
                            " added to dataset of dimension " + std::to_string(dim_));
  }
  if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
  values_.insert(values_.end(), x.begin(), x.end());
  labels_.push_back(static_cast<std::uint8_t>(y));
}

ForestParams ForestParams::resolved(std::size_t n, std::size_t dim) const {
  ForestParams p = *this;
  if (p.trees == 0) throw InvalidArgument("forest needs at least one tree");
  if (dim == 0) throw InvalidArgument("feature dimension must be >= 1");
  if (p.bootstrap_size == 0) p.bootstrap_size = n;
  if (p.feature_subset_size == 0) {
    p.feature_subset_size = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
  }
  p.feature_subset_size = std::clamp<std::size_t>(p.feature_subset_size, 1, dim);
  if (p.min_leaf == 0) p.min_leaf = 1;
  return p;
}

double gini(std::size_t n0, std::size_t n1) {
  const std::size_t n = n0 + n1;
  if (n == 0) throw EmptyNode("Gini impurity of an empty node is undefined");
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

// ---------------------------------------------------------------------------
// Tree
// ---------------------------------------------------------------------------

int Tree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes_[i].majority();
}

std::size_t Tree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t best = 0;
  // Children always have larger indices than their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.is_leaf(); }));
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

namespace {

using u128 = unsigned __int128;

// Minimizing the weighted child Gini is maximizing
//   S = (l0^2 + l1^2) / nl + (r0^2 + r1^2) / nr,
// kept as an exact fraction so that equal scores compare equal.
struct Score {
  u128 num = 0;
  u128 den = 1;

  static Score of(std::uint64_t l0, std::uint64_t l1, std::uint64_t r0, std::uint64_t r1) {
    const u128 nl = l0 + l1, nr = r0 + r1;
    const u128 a = u128(l0) * l0 + u128(l1) * l1;
    const u128 b = u128(r0) * r0 + u128(r1) * r1;
    return {a * nr + b * nl, nl * nr};
  }

  bool operator>(const Score& o) const { return num * o.den > o.num * den; }

  double weighted_gini(std::size_t n) const {
    return 1.0 - static_cast<double>(num) / static_cast<double>(den) / static_cast<double>(n);
  }
};

struct Candidate {
  std::size_t feature;
  double threshold;
  Score score;
};

double midpoint_between(double a, double b) {
  const double m = std::midpoint(a, b);
  return m < b ? m : a;
}

class SplitSearch {
 public:
  SplitSearch(const Dataset& data, std::span<const std::size_t> rows, std::size_t min_leaf)
      : data_(data), rows_(rows), min_leaf_(min_leaf) {
    for (auto r : rows_) (data_.label(r) ? total1_ : total0_)++;
    pairs_.resize(rows_.size());
  }

  /// Scores one feature. Returns false when the feature is constant on the rows.
  bool consider(std::size_t feature, std::optional<Candidate>& best) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      pairs_[i] = {data_.at(rows_[i], feature), data_.label(rows_[i])};
    }
    std::sort(pairs_.begin(), pairs_.end());
    if (!(pairs_.front().first < pairs_.back().first)) return false;

    std::uint64_t l0 = 0, l1 = 0;
    const std::size_t n = pairs_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      (pairs_[i].second ? l1 : l0)++;
      if (!(pairs_[i].first < pairs_[i + 1].first)) continue;
      const std::size_t nl = i + 1;
      if (nl < min_leaf_ || n - nl < min_leaf_) continue;
      const Score s = Score::of(l0, l1, total0_ - l0, total1_ - l1);
      // Equal scores: lower feature index wins; within a feature the first
      // (lowest) threshold is kept.
      if (!best || s > best->score ||
          (!(best->score > s) && feature < best->feature)) {
        best = Candidate{feature, midpoint_between(pairs_[i].first, pairs_[i + 1].first), s};
      }
    }
    return true;
  }

  std::uint64_t total0() const { return total0_; }
  std::uint64_t total1() const { return total1_; }

 private:
  const Dataset& data_;
  std::span<const std::size_t> rows_;
  std::size_t min_leaf_;
  std::uint64_t total0_ = 0, total1_ = 0;
  std::vector<std::pair<double, int>> pairs_;
};

}  // namespace

std::optional<SplitChoice> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features, std::size_t min_leaf) {
  if (rows.empty()) return std::nullopt;
  SplitSearch search(data, rows, std::max<std::size_t>(min_leaf, 1));
  std::optional<Candidate> best;
  for (auto f : features) search.consider(f, best);
  if (!best) return std::nullopt;
  return SplitChoice{best->feature, best->threshold, best->score.weighted_gini(rows.size())};
}

// ---------------------------------------------------------------------------
// Growing
// ---------------------------------------------------------------------------

Tree grow_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestParams& params,
               Rng& rng) {
  if (rows.empty()) throw EmptyDataset("cannot grow a tree on an empty sample");
  const std::size_t p = data.dim();
  const ForestParams prm = params.resolved(rows.size(), p);

  std::vector<std::size_t> idx(rows.begin(), rows.end());
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Node> nodes(1);
  struct Work {
    std::size_t node, begin, end, depth;
  };
  std::vector<Work> stack{{0, 0, idx.size(), 0}};

  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    const auto span = std::span<const std::size_t>(idx).subspan(w.begin, w.end - w.begin);

    SplitSearch search(data, span, prm.min_leaf);
    Node& node = nodes[w.node];
    node.count0 = static_cast<std::uint32_t>(search.total0());
    node.count1 = static_cast<std::uint32_t>(search.total1());

    const bool pure = node.count0 == 0 || node.count1 == 0;
    const bool depth_capped = prm.max_depth != 0 && w.depth >= prm.max_depth;
    if (pure || depth_capped || span.size() < 2 * prm.min_leaf) continue;

    // Lazy Fisher-Yates over the persistent feature order: each node sees a
    // uniformly random visiting order.
    std::optional<Candidate> best;
    std::size_t scored = 0;
    for (std::size_t k = 0; k < p && scored < prm.feature_subset_size; ++k) {
      std::swap(order[k], order[k + rng.uniform_index(p - k)]);
      if (search.consider(order[k], best)) ++scored;
    }
    if (!best) continue;

    auto mid = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(w.begin),
                              idx.begin() + static_cast<std::ptrdiff_t>(w.end),
                              [&](std::size_t r) { return data.at(r, best->feature) <= best->threshold; });
    const std::size_t split_at = static_cast<std::size_t>(mid - idx.begin());

    const auto left = static_cast<std::int32_t>(nodes.size());
    nodes[w.node].feature = static_cast<std::int32_t>(best->feature);
    nodes[w.node].threshold = best->threshold;
    nodes[w.node].left = left;
    nodes[w.node].right = left + 1;
    nodes.resize(nodes.size() + 2);

    // Left subtree is grown first.
    stack.push_back({static_cast<std::size_t>(left) + 1, split_at, w.end, w.depth + 1});
    stack.push_back({static_cast<std::size_t>(left), w.begin, split_at, w.depth + 1});
  }
  return Tree(std::move(nodes));
}

// ---------------------------------------------------------------------------
// Forest
// ---------------------------------------------------------------------------

Forest::Forest(ForestParams params, std::size_t dim, std::vector<Tree> trees)
    : params_(std::move(params)), dim_(dim), trees_(std::move(trees)) {
  if (trees_.empty()) throw InvalidArgument("forest needs at least one tree");
  params_.trees = trees_.size();
}

Prediction Forest::predict(std::span<const double> x) const {
  if (x.size() != dim_) {
    throw DimensionMismatch("input of dimension " + std::to_string(x.size()) +
                            ", forest expects " + std::to_string(dim_));
  }
  Prediction p;
  for (const auto& t : trees_) p.votes += static_cast<std::size_t>(t.predict(x));
  const std::size_t b = trees_.size();
  p.vote_fraction = static_cast<double>(p.votes) / static_cast<double>(b);
  if (2 * p.votes > b) {
    p.label = 1;
  } else if (2 * p.votes == b) {
    p.label = params_.tie_to_positive ? 1 : 0;
  }
  return p;
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> rows(m);
  for (auto& r : rows) r = rng.uniform_index(n);
  return rows;
}

Forest train(const Dataset& data, const ForestParams& params, std::size_t threads) {
  if (data.empty()) throw EmptyDataset("cannot train a forest on an empty dataset");
  const ForestParams prm = params.resolved(data.size(), data.dim());

  const auto positives = std::count(data.labels().begin(), data.labels().end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == data.size()) {
    log::warn("training data holds a single class; the forest will predict it everywhere");
  }

  std::vector<Tree> trees(prm.trees);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < prm.trees; b = next++) {
      Rng rng(derive_seed(prm.seed, b));
      const auto rows = bootstrap_rows(data.size(), prm.bootstrap_size, rng);
      trees[b] = grow_tree(data, rows, prm, rng);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, prm.trees);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  return Forest(prm, data.dim(), std::move(trees));
}

}  // namespace ctp::rf
