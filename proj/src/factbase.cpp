#include "leakguard/factbase.hpp"

#include <algorithm>
#include <array>
#include <charconv>

namespace leakguard {

std::string to_string(const EncodingScheme& scheme) {
  switch (scheme.kind) {
    case Encoding::Element: return "element";
    case Encoding::Powerset: return "powerset";
    case Encoding::Segmented: return "segmented:" + std::to_string(scheme.segment_width);
  }
  return "?";
}

EncodingScheme parse_encoding(std::string_view text) {
  if (text == "element") return EncodingScheme::element();
  if (text == "powerset") return EncodingScheme::powerset();
  if (text == "segmented") return EncodingScheme::segmented();
  constexpr std::string_view prefix = "segmented:";
  if (text.starts_with(prefix)) {
    int s = 0;
    auto rest = text.substr(prefix.size());
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), s);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || s <= 0 || s > 64)
      throw InvalidEncoding("segment width must be an integer in [1, 64]: '" + std::string(text) + "'");
    return EncodingScheme::segmented(static_cast<unsigned>(s));
  }
  throw InvalidEncoding("unknown encoding '" + std::string(text) + "'");
}

std::string_view to_string(SetRel rel) {
  switch (rel) {
    case SetRel::Supp: return "Supp";
    case SetRel::Unq: return "Unq";
    case SetRel::Dom: return "Dom";
  }
  return "?";
}

namespace {

constexpr std::size_t kRelations = 3;

const InputSet& pick(const NodeSets& n, SetRel r) {
  switch (r) {
    case SetRel::Supp: return n.supp;
    case SetRel::Unq: return n.unq;
    case SetRel::Dom: return n.dom;
  }
  return n.supp;
}

std::size_t rel_index(SetRel r) { return static_cast<std::size_t>(r); }

// Renders `count` bits starting at input `first`, highest input leftmost.
std::string bit_string(const InputSet& s, std::size_t first, std::size_t count) {
  std::string out = "b";
  for (std::size_t k = count; k-- > 0;) out += s.test(first + k) ? '1' : '0';
  return out;
}

// Relation V x IN: member inputs per node, sorted, in CSR layout.
class ElementRelations final : public SetRelations {
 public:
  ElementRelations(const std::vector<NodeSets>& nodes, std::size_t universe) : universe_(universe) {
    for (std::size_t r = 0; r < kRelations; ++r) {
      auto& rel = rels_[r];
      rel.offsets.reserve(nodes.size() + 1);
      rel.offsets.push_back(0);
      for (const auto& n : nodes) {
        const auto& s = pick(n, static_cast<SetRel>(r));
        for (auto i = s.find_first(); i != InputSet::npos; i = s.find_next(i))
          rel.members.push_back(static_cast<std::uint32_t>(i));
        rel.offsets.push_back(rel.members.size());
      }
    }
    num_nodes_ = nodes.size();
  }

  EncodingScheme scheme() const override { return EncodingScheme::element(); }
  std::size_t num_nodes() const override { return num_nodes_; }
  std::size_t universe() const override { return universe_; }

  bool empty(SetRel r, NodeId x) const override { return range(r, x).first == range(r, x).second; }

  bool disjoint(SetRel a, NodeId x, SetRel b, NodeId y) const override {
    auto [i, ie] = range(a, x);
    auto [j, je] = range(b, y);
    while (i != ie && j != je) {
      if (*i == *j) return false;
      if (*i < *j) ++i; else ++j;
    }
    return true;
  }

  bool subset(SetRel a, NodeId x, SetRel b, NodeId y) const override {
    auto [i, ie] = range(a, x);
    auto [j, je] = range(b, y);
    return std::includes(j, je, i, ie);
  }

  bool equal(SetRel r, NodeId x, NodeId y) const override {
    auto [i, ie] = range(r, x);
    auto [j, je] = range(r, y);
    return std::equal(i, ie, j, je);
  }

  InputSet decode(SetRel r, NodeId x) const override {
    InputSet s(universe_);
    auto [i, ie] = range(r, x);
    for (; i != ie; ++i) s.set(*i);
    return s;
  }

  std::size_t fact_count(SetRel r) const override { return rels_[rel_index(r)].members.size(); }
  std::size_t fact_count(SetRel r, NodeId x) const override {
    auto [i, ie] = range(r, x);
    return static_cast<std::size_t>(ie - i);
  }

  std::vector<std::string> render(SetRel r, NodeId x, const std::string& name) const override {
    std::vector<std::string> out;
    auto [i, ie] = range(r, x);
    for (; i != ie; ++i) out.push_back(std::string(to_string(r)) + "(" + name + ",i" + std::to_string(*i) + ")");
    return out;
  }

 private:
  using It = std::vector<std::uint32_t>::const_iterator;
  struct Rel {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> members;
  };

  std::pair<It, It> range(SetRel r, NodeId x) const {
    const auto& rel = rels_[rel_index(r)];
    return {rel.members.begin() + static_cast<std::ptrdiff_t>(rel.offsets[x]),
            rel.members.begin() + static_cast<std::ptrdiff_t>(rel.offsets[x + 1])};
  }

  std::array<Rel, kRelations> rels_;
  std::size_t num_nodes_ = 0;
  std::size_t universe_;
};

// Relation V x 2^IN: one whole-set fact per node.
class PowersetRelations final : public SetRelations {
 public:
  PowersetRelations(const std::vector<NodeSets>& nodes, std::size_t universe) : universe_(universe) {
    for (std::size_t r = 0; r < kRelations; ++r) {
      rels_[r].reserve(nodes.size());
      for (const auto& n : nodes) rels_[r].push_back(pick(n, static_cast<SetRel>(r)));
    }
  }

  EncodingScheme scheme() const override { return EncodingScheme::powerset(); }
  std::size_t num_nodes() const override { return rels_[0].size(); }
  std::size_t universe() const override { return universe_; }

  bool empty(SetRel r, NodeId x) const override { return get(r, x).none(); }
  bool disjoint(SetRel a, NodeId x, SetRel b, NodeId y) const override { return !get(a, x).intersects(get(b, y)); }
  bool subset(SetRel a, NodeId x, SetRel b, NodeId y) const override { return get(a, x).is_subset_of(get(b, y)); }
  bool equal(SetRel r, NodeId x, NodeId y) const override { return get(r, x) == get(r, y); }
  InputSet decode(SetRel r, NodeId x) const override { return get(r, x); }

  std::size_t fact_count(SetRel r) const override { return rels_[rel_index(r)].size(); }
  std::size_t fact_count(SetRel, NodeId) const override { return 1; }

  std::vector<std::string> render(SetRel r, NodeId x, const std::string& name) const override {
    return {std::string(to_string(r)) + "(" + name + "," + bit_string(get(r, x), 0, universe_) + ")"};
  }

 private:
  const InputSet& get(SetRel r, NodeId x) const { return rels_[rel_index(r)][x]; }

  std::array<std::vector<InputSet>, kRelations> rels_;
  std::size_t universe_;
};

// Relation V x idx x 2^S: one fact per non-empty segment, sorted by idx.
class SegmentedRelations final : public SetRelations {
 public:
  SegmentedRelations(const std::vector<NodeSets>& nodes, std::size_t universe, unsigned width)
      : universe_(universe), width_(width) {
    for (std::size_t r = 0; r < kRelations; ++r) {
      auto& rel = rels_[r];
      rel.offsets.reserve(nodes.size() + 1);
      rel.offsets.push_back(0);
      for (const auto& n : nodes) {
        const auto& s = pick(n, static_cast<SetRel>(r));
        // Members come out in increasing order, so segments do too.
        for (auto i = s.find_first(); i != InputSet::npos; i = s.find_next(i)) {
          const auto seg = static_cast<std::uint32_t>(i / width);
          const std::uint64_t bit = std::uint64_t{1} << (i % width);
          const bool open = rel.segs.size() > rel.offsets.back() && rel.segs.back().idx == seg;
          if (open) rel.segs.back().bits |= bit;
          else rel.segs.push_back({seg, bit});
        }
        rel.offsets.push_back(rel.segs.size());
      }
    }
    num_nodes_ = nodes.size();
  }

  EncodingScheme scheme() const override { return EncodingScheme::segmented(width_); }
  std::size_t num_nodes() const override { return num_nodes_; }
  std::size_t universe() const override { return universe_; }

  bool empty(SetRel r, NodeId x) const override {
    auto [i, ie] = range(r, x);
    return i == ie;
  }

  bool disjoint(SetRel a, NodeId x, SetRel b, NodeId y) const override {
    auto [i, ie] = range(a, x);
    auto [j, je] = range(b, y);
    while (i != ie && j != je) {
      if (i->idx == j->idx) {
        if (i->bits & j->bits) return false;
        ++i;
        ++j;
      } else if (i->idx < j->idx) {
        ++i;
      } else {
        ++j;
      }
    }
    return true;
  }

  bool subset(SetRel a, NodeId x, SetRel b, NodeId y) const override {
    auto [i, ie] = range(a, x);
    auto [j, je] = range(b, y);
    for (; i != ie; ++i) {
      while (j != je && j->idx < i->idx) ++j;
      if (j == je || j->idx != i->idx) return false;
      if (i->bits & ~j->bits) return false;
    }
    return true;
  }

  bool equal(SetRel r, NodeId x, NodeId y) const override {
    auto [i, ie] = range(r, x);
    auto [j, je] = range(r, y);
    return std::equal(i, ie, j, je, [](const Seg& p, const Seg& q) { return p.idx == q.idx && p.bits == q.bits; });
  }

  InputSet decode(SetRel r, NodeId x) const override {
    InputSet s(universe_);
    auto [i, ie] = range(r, x);
    for (; i != ie; ++i)
      for (unsigned k = 0; k < width_; ++k)
        if (i->bits >> k & 1) s.set(std::size_t{i->idx} * width_ + k);
    return s;
  }

  std::size_t fact_count(SetRel r) const override { return rels_[rel_index(r)].segs.size(); }
  std::size_t fact_count(SetRel r, NodeId x) const override {
    auto [i, ie] = range(r, x);
    return static_cast<std::size_t>(ie - i);
  }

  std::vector<std::string> render(SetRel r, NodeId x, const std::string& name) const override {
    std::vector<std::string> out;
    const InputSet s = decode(r, x);
    auto [i, ie] = range(r, x);
    for (; i != ie; ++i) {
      const std::size_t first = std::size_t{i->idx} * width_;
      const std::size_t count = std::min<std::size_t>(width_, universe_ - first);
      out.push_back(std::string(to_string(r)) + "(" + name + "," + std::to_string(i->idx) + "," +
                    bit_string(s, first, count) + ")");
    }
    return out;
  }

 private:
  struct Seg {
    std::uint32_t idx;
    std::uint64_t bits;
  };
  struct Rel {
    std::vector<std::size_t> offsets;
    std::vector<Seg> segs;
  };
  using It = std::vector<Seg>::const_iterator;

  std::pair<It, It> range(SetRel r, NodeId x) const {
    const auto& rel = rels_[rel_index(r)];
    return {rel.segs.begin() + static_cast<std::ptrdiff_t>(rel.offsets[x]),
            rel.segs.begin() + static_cast<std::ptrdiff_t>(rel.offsets[x + 1])};
  }

  std::array<Rel, kRelations> rels_;
  std::size_t num_nodes_ = 0;
  std::size_t universe_;
  unsigned width_;
};

}  // namespace

std::unique_ptr<SetRelations> encode_sets(const std::vector<NodeSets>& nodes, std::size_t universe,
                                          EncodingScheme scheme) {
  switch (scheme.kind) {
    case Encoding::Element: return std::make_unique<ElementRelations>(nodes, universe);
    case Encoding::Powerset: return std::make_unique<PowersetRelations>(nodes, universe);
    case Encoding::Segmented:
      if (scheme.segment_width == 0 || scheme.segment_width > 64)
        throw InvalidEncoding("segment width must be in [1, 64], got " + std::to_string(scheme.segment_width));
      return std::make_unique<SegmentedRelations>(nodes, universe, scheme.segment_width);
  }
  throw InvalidEncoding("unknown encoding");
}

std::unique_ptr<SetRelations> encode_sets(const DepSets& d, EncodingScheme scheme) {
  std::vector<NodeSets> nodes;
  nodes.reserve(d.supp.size() + 1);
  for (std::size_t v = 0; v < d.supp.size(); ++v) nodes.push_back(d.node(static_cast<VarId>(v)));
  const InputSet none(d.num_inputs());
  nodes.push_back({d.secret_inputs, none, none});
  return encode_sets(nodes, d.num_inputs(), scheme);
}

}  // namespace leakguard
