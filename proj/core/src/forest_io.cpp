#include <fstream>
#include <vector>

#include "binary_io.hpp"
#include "ctp/error.hpp"
#include "ctp/forest.hpp"

namespace ctp::rf {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'P', 'F'};

// Trees are stored in pre-order with children after their parent; checking
// that each child index is larger than its parent and referenced once rules
// out cycles and shared subtrees.
void check_tree(const std::vector<Node>& nodes, std::size_t dim, const std::string& where) {
  if (nodes.empty()) throw CorruptFile(where + ": tree without nodes");
  std::vector<bool> referenced(nodes.size(), false);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = nodes[i];
    if (n.is_leaf()) {
      if (n.feature != -1 || n.left != -1 || n.right != -1) {
        throw CorruptFile(where + ": malformed leaf");
      }
      continue;
    }
    if (static_cast<std::size_t>(n.feature) >= dim) {
      throw CorruptFile(where + ": split on feature " + std::to_string(n.feature) +
                        " outside dimension " + std::to_string(dim));
    }
    for (auto child : {n.left, n.right}) {
      if (child <= static_cast<std::int32_t>(i) ||
          static_cast<std::size_t>(child) >= nodes.size() ||
          referenced[static_cast<std::size_t>(child)]) {
        throw CorruptFile(where + ": invalid child reference");
      }
      referenced[static_cast<std::size_t>(child)] = true;
    }
  }
}

}  // namespace

void save(const Forest& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  detail::BinaryWriter w(out);
  const auto& p = f.params();
  out.write(kMagic, 4);
  w.u32(kForestFormatVersion);
  w.u32(static_cast<std::uint32_t>(f.trees().size()));
  w.u64(f.dim());
  w.u64(p.seed);
  w.u64(p.bootstrap_size);
  w.u64(p.feature_subset_size);
  w.u32(static_cast<std::uint32_t>(p.max_depth));
  w.u32(static_cast<std::uint32_t>(p.min_leaf));
  w.u8(p.tie_to_positive ? 1 : 0);
  w.str(f.metadata);
  for (const auto& t : f.trees()) {
    w.u32(static_cast<std::uint32_t>(t.nodes().size()));
    for (const auto& n : t.nodes()) {
      w.i32(n.feature);
      w.f64(n.threshold);
      w.i32(n.left);
      w.i32(n.right);
      w.u32(n.count0);
      w.u32(n.count1);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Forest load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string where = path.string();
  detail::BinaryReader r(in, where);
  if (r.bytes(4) != std::string(kMagic, 4)) throw CorruptFile(where + ": not a forest file");
  const auto version = r.u32();
  if (version != kForestFormatVersion) {
    throw FormatVersionMismatch(where + ": forest format version " + std::to_string(version) +
                                ", this build reads " + std::to_string(kForestFormatVersion));
  }
  const auto n_trees = r.u32();
  const auto dim = r.u64();
  if (n_trees == 0 || dim == 0) throw CorruptFile(where + ": empty forest header");

  ForestParams p;
  p.trees = n_trees;
  p.seed = r.u64();
  p.bootstrap_size = r.u64();
  p.feature_subset_size = r.u64();
  p.max_depth = r.u32();
  p.min_leaf = r.u32();
  const auto tie = r.u8();
  if (tie > 1) throw CorruptFile(where + ": bad tie flag");
  p.tie_to_positive = tie == 1;
  std::string metadata = r.str();

  std::vector<Tree> trees;
  trees.reserve(std::min<std::uint32_t>(n_trees, 4096));
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const auto n_nodes = r.u32();
    std::vector<Node> nodes;
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      Node n;
      n.feature = r.i32();
      n.threshold = r.f64();
      n.left = r.i32();
      n.right = r.i32();
      n.count0 = r.u32();
      n.count1 = r.u32();
      nodes.push_back(n);
    }
    check_tree(nodes, dim, where);
    trees.emplace_back(std::move(nodes));
  }
  if (!r.at_end()) throw CorruptFile(where + ": trailing data");

  Forest f(p, dim, std::move(trees));
  f.metadata = std::move(metadata);
  return f;
}

}  // namespace ctp::rf
