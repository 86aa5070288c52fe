#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gdlnn {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// Closed interval over the extended reals. lo may be -inf, hi may be +inf.
struct Interval {
    double lo = kNegInf;
    double hi = kPosInf;

    bool contains(double x) const { return lo <= x && x <= hi; }
    bool unbounded() const { return lo == kNegInf && hi == kPosInf; }
    bool operator==(const Interval&) const = default;
};

using IntervalVec = std::vector<Interval>;

// "node x <[a, b], ...>" — absent constraints mean the node is unconstrained.
struct NodeDescription {
    std::string var;
    std::optional<IntervalVec> constraints;
    bool operator==(const NodeDescription&) const = default;
};

// "edge (x, y) <[a, b], ...>" — src/dst must be declared node variables.
struct EdgeDescription {
    std::string src;
    std::string dst;
    std::optional<IntervalVec> constraints;
    bool operator==(const EdgeDescription&) const = default;
};

// A GDL program: a conjunction of node and edge descriptions. Descriptions
// are stored grouped by kind; order is preserved within each kind but carries
// no meaning (the semantics is a conjunction).
//
// Invariants (checked by validate_program, maintained by the parser and the
// mining operations):
//   - every node variable appears in exactly one NodeDescription
//   - every EdgeDescription references declared variables
//   - no two EdgeDescriptions share the same (src, dst) pair
//   - a present constraint vector is never all-unbounded (such vectors are
//     normalized to "absent" so printing and equality agree)
struct Program {
    std::vector<NodeDescription> nodes;
    std::vector<EdgeDescription> edges;

    std::size_t size() const { return nodes.size() + edges.size(); }
    bool empty() const { return nodes.empty() && edges.empty(); }
    bool operator==(const Program&) const = default;
};

// Replaces an all-unbounded constraint vector with nullopt.
std::optional<IntervalVec> normalize_constraints(std::optional<IntervalVec> cs);

// Throws ValidationError if any Program invariant is violated.
void validate_program(const Program& p);

// Parses the textual GDL format:
//   node-desc := "node" IDENT [ "<" interval ("," interval)* ">" ]
//   edge-desc := "edge" "(" IDENT "," IDENT ")" [ "<" interval ("," interval)* ">" ]
//   interval  := "[" number-or-neginf "," number-or-posinf "]"
// One description per line; "//" starts a comment; blank lines are ignored.
// Throws ParseError (with line/column) or the Program-invariant errors.
Program parse_program(const std::string& text);

// Canonical textual form; round-trips through parse_program. Numbers print
// with a ".0" suffix when integral, otherwise as the shortest string that
// parses back to the same double. Unconstrained descriptions omit the vector.
std::string print_program(const Program& p);

// nullopt when every present constraint vector matches the dataset dims
// (length d for nodes, c for edges); otherwise a message naming the
// offending description.
std::optional<std::string> validate_against_dataset(const Program& p, int d, int c);

// Order-insensitive structural equality on the description multiset.
bool equivalent_programs(const Program& a, const Program& b);

// Canonical form for deduplication and tie-breaking: node descriptions are
// sorted by (constraints, original name) and renamed v0..vK in that order,
// edges renamed accordingly and sorted. Two programs with equal canonical
// text are alpha-equivalent.
Program canonicalize_program(const Program& p);
std::string canonical_text(const Program& p);

// Shared number formatting (also used by the layer/model file writers):
// inf/-inf tokens, ".0"-suffixed integral values, shortest round-trip otherwise.
std::string format_real(double v);

}  // namespace gdlnn
