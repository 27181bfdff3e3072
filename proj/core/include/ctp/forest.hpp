#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctp/rng.hpp"

namespace ctp::rf {

/// Binary-labeled design matrix; y = 1 means the trial advanced ("Yes").
class Dataset {
 public:
  explicit Dataset(std::size_t dim = 0) : dim_(dim) {}

  /// The first row fixes the dimension of an empty, dimensionless dataset.
  void add(std::span<const double> x, int y);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
  double at(std::size_t i, std::size_t feature) const { return values_[i * dim_ + feature]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const std::uint8_t> labels() const { return labels_; }

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
};

/// Zero-valued size fields mean "use the default for this dataset".
struct ForestParams {
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::size_t bootstrap_size = 0;       // 0: n rows, drawn with replacement
  std::size_t feature_subset_size = 0;  // 0: ceil(sqrt(dim))
  std::size_t max_depth = 0;            // 0: unlimited
  std::size_t min_leaf = 1;
  bool tie_to_positive = false;         // vote ties predict 0 unless set

  /// Fills the defaulted fields for an n x dim dataset and checks ranges.
  /// Throws InvalidArgument.
  ForestParams resolved(std::size_t n, std::size_t dim) const;

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Gini impurity 1 - p0^2 - p1^2. Throws EmptyNode when n0 + n1 == 0.
double gini(std::size_t n0, std::size_t n1);

struct Node {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // rows with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t count0 = 0;   // in-bag class counts reaching this node
  std::uint32_t count1 = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  /// Majority class; ties go to 0.
  int majority() const noexcept { return count1 > count0 ? 1 : 0; }

  friend bool operator==(const Node&, const Node&) = default;
};

class Tree {
 public:
  Tree() = default;
  explicit Tree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  int predict(std::span<const double> x) const;

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const;
  std::size_t leaf_count() const;

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::vector<Node> nodes_;
};

struct SplitChoice {
  std::size_t feature = 0;
  double threshold = 0.0;
  double weighted_gini = 0.0;  // size-weighted Gini of the two children
};

/// Best (feature, midpoint) split over `features` for the given rows, or
/// nullopt when every candidate is constant or min_leaf rules out every cut.
/// Equal scores prefer the lower feature index, then the lower threshold.
std::optional<SplitChoice> best_split(const Dataset& data, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features,
                                      std::size_t min_leaf = 1);

/// Grows one tree on `rows` (indices into `data`, repeats allowed). At each
/// node, features are visited in a fresh random order from `rng` until
/// `feature_subset_size` non-constant ones have been scored. Growth stops at
/// pure nodes, at max_depth, or when no valid split exists (rows identical
/// on every feature).
Tree grow_tree(const Dataset& data, std::span<const std::size_t> rows, const ForestParams& params,
               Rng& rng);

struct Prediction {
  int label = 0;
  double vote_fraction = 0.0;  // votes for class 1 / number of trees
  std::size_t votes = 0;
};

class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, std::size_t dim, std::vector<Tree> trees);

  /// Throws DimensionMismatch.
  Prediction predict(std::span<const double> x) const;

  const ForestParams& params() const noexcept { return params_; }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  /// Free-form provenance carried through save/load.
  std::string metadata;

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  ForestParams params_;
  std::size_t dim_ = 0;
  std::vector<Tree> trees_;
};

/// Bootstrap-aggregated training. Tree b draws its bootstrap sample and its
/// feature subsets from a stream seeded by (params.seed, b), so the result
/// does not depend on `threads` (0 = hardware concurrency).
/// Throws EmptyDataset; a single-class dataset only logs a warning.
Forest train(const Dataset& data, const ForestParams& params, std::size_t threads = 0);

/// m row indices drawn uniformly with replacement from [0, n), as train() draws them.
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::size_t m, Rng& rng);

inline constexpr std::uint32_t kForestFormatVersion = 1;

/// Binary layout is documented in docs/formats.md.
void save(const Forest& f, const std::filesystem::path& path);
/// Throws CorruptFile or FormatVersionMismatch.
Forest load(const std::filesystem::path& path);

}  // namespace ctp::rf
