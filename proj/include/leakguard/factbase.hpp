// Fact storage for type inference.
//
// The precomputed supp/unq/dom sets become facts of three relations. How a
// set is spelled as facts depends on the encoding scheme:
//
//   Element    Supp(v, i)          one fact per member input
//   Powerset   Supp(v, bits)       one fact per node, the whole set as a bit vector
//   Segmented  Supp(v, idx, bits)  one fact per non-empty S-bit segment
//
// Rule bodies only ever ask the set questions below, so every scheme answers
// them natively from its own fact layout.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "leakguard/depsets.hpp"

namespace leakguard {

enum class Encoding : std::uint8_t { Element, Powerset, Segmented };

struct EncodingScheme {
  Encoding kind = Encoding::Segmented;
  /// Segment width S; only used by the segmented scheme.
  unsigned segment_width = 4;

  static EncodingScheme element() { return {Encoding::Element, 1}; }
  static EncodingScheme powerset() { return {Encoding::Powerset, 0}; }
  static EncodingScheme segmented(unsigned s = 4) { return {Encoding::Segmented, s}; }
};

std::string to_string(const EncodingScheme& scheme);
/// Accepts `element`, `powerset`, `segmented` and `segmented:S`.
EncodingScheme parse_encoding(std::string_view text);

enum class SetRel : std::uint8_t { Supp = 0, Unq = 1, Dom = 2 };
std::string_view to_string(SetRel rel);

/// Node index into the encoded relations. Nodes [0, num_vars) are program
/// variables; extra nodes may follow (e.g. the secret-input set).
using NodeId = std::uint32_t;

class SetRelations {
 public:
  virtual ~SetRelations() = default;

  virtual EncodingScheme scheme() const = 0;
  virtual std::size_t num_nodes() const = 0;
  virtual std::size_t universe() const = 0;

  virtual bool empty(SetRel r, NodeId x) const = 0;
  virtual bool disjoint(SetRel a, NodeId x, SetRel b, NodeId y) const = 0;
  /// a(x) \ b(y) is empty, i.e. a(x) is a subset of b(y).
  virtual bool subset(SetRel a, NodeId x, SetRel b, NodeId y) const = 0;
  virtual bool equal(SetRel r, NodeId x, NodeId y) const = 0;

  virtual InputSet decode(SetRel r, NodeId x) const = 0;
  virtual std::size_t fact_count(SetRel r) const = 0;
  virtual std::size_t fact_count(SetRel r, NodeId x) const = 0;
  /// Facts of one node rendered like `Supp(v1,1,b01)`.
  virtual std::vector<std::string> render(SetRel r, NodeId x, const std::string& name) const = 0;
};

class InvalidEncoding : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Encodes one set per node per relation. `nodes[i]` supplies node i.
/// Throws InvalidEncoding for a segment width outside [1, 64].
std::unique_ptr<SetRelations> encode_sets(const std::vector<NodeSets>& nodes, std::size_t universe,
                                          EncodingScheme scheme);

/// Encodes the sets of every program variable, followed by one extra node
/// whose supp is the secret-input set.
std::unique_ptr<SetRelations> encode_sets(const DepSets& d, EncodingScheme scheme);

}  // namespace leakguard
