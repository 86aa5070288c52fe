#include "gdlnn/gdl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "gdlnn/errors.hpp"

namespace gdlnn {

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == std::floor(v) && std::fabs(v) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", v);
        return buf;
    }
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

std::optional<IntervalVec> normalize_constraints(std::optional<IntervalVec> cs) {
    if (!cs) return std::nullopt;
    for (const Interval& itv : *cs) {
        if (!itv.unbounded()) return cs;
    }
    return std::nullopt;
}

void validate_program(const Program& p) {
    std::set<std::string> vars;
    for (const NodeDescription& nd : p.nodes) {
        if (!vars.insert(nd.var).second) {
            throw ValidationError("duplicate node variable '" + nd.var + "'");
        }
        if (nd.constraints) {
            for (const Interval& itv : *nd.constraints) {
                if (!(itv.lo <= itv.hi)) {
                    throw ValidationError("empty interval in node '" + nd.var + "'");
                }
            }
        }
    }
    std::set<std::pair<std::string, std::string>> seen_edges;
    for (const EdgeDescription& ed : p.edges) {
        if (!vars.count(ed.src)) {
            throw ValidationError("undeclared variable '" + ed.src + "' in edge description");
        }
        if (!vars.count(ed.dst)) {
            throw ValidationError("undeclared variable '" + ed.dst + "' in edge description");
        }
        if (!seen_edges.insert({ed.src, ed.dst}).second) {
            throw ValidationError("duplicate edge description (" + ed.src + ", " + ed.dst + ")");
        }
        if (ed.constraints) {
            for (const Interval& itv : *ed.constraints) {
                if (!(itv.lo <= itv.hi)) {
                    throw ValidationError("empty interval in edge (" + ed.src + ", " + ed.dst + ")");
                }
            }
        }
    }
}

namespace {

struct LineLexer {
    const std::string& s;
    int line;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, line, static_cast<int>(pos) + 1);
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\r')) ++pos;
    }

    bool at_end() {
        skip_ws();
        return pos >= s.size();
    }

    void expect(char ch) {
        skip_ws();
        if (pos >= s.size() || s[pos] != ch) {
            fail(std::string("expected '") + ch + "'");
        }
        ++pos;
    }

    static bool ident_start(char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
    }
    static bool ident_char(char ch) {
        return ident_start(ch) || (ch >= '0' && ch <= '9') || ch == '_';
    }

    std::string ident() {
        skip_ws();
        if (pos >= s.size() || !ident_start(s[pos])) fail("expected identifier");
        std::size_t start = pos;
        while (pos < s.size() && ident_char(s[pos])) ++pos;
        return s.substr(start, pos - start);
    }

    bool try_word(const char* w) {
        skip_ws();
        std::size_t len = std::char_traits<char>::length(w);
        if (s.compare(pos, len, w) != 0) return false;
        std::size_t after = pos + len;
        if (after < s.size() && ident_char(s[after])) return false;
        pos = after;
        return true;
    }

    double number() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        std::size_t digits_from = pos;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' ||
                s[pos] == 'e' || s[pos] == 'E' ||
                ((s[pos] == '+' || s[pos] == '-') && (s[pos - 1] == 'e' || s[pos - 1] == 'E')))) {
            ++pos;
        }
        if (pos == digits_from) {
            pos = start;
            fail("expected number");
        }
        double value = 0.0;
        const char* first = s.data() + start;
        const char* last = s.data() + pos;
        if (*first == '+') ++first;  // from_chars rejects a leading '+'
        auto [end, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || end != last) {
            pos = start;
            fail("malformed number");
        }
        return value;
    }

    Interval interval() {
        expect('[');
        double lo;
        if (try_word("-inf")) {
            lo = kNegInf;
        } else {
            lo = number();
        }
        expect(',');
        double hi;
        if (try_word("inf")) {
            hi = kPosInf;
        } else if (try_word("-inf")) {
            fail("interval upper bound cannot be -inf");
        } else {
            hi = number();
        }
        expect(']');
        if (!(lo <= hi)) fail("empty interval: lower bound exceeds upper bound");
        return {lo, hi};
    }

    std::optional<IntervalVec> constraint_vector() {
        skip_ws();
        if (pos >= s.size() || s[pos] != '<') return std::nullopt;
        ++pos;
        IntervalVec vec;
        vec.push_back(interval());
        skip_ws();
        while (pos < s.size() && s[pos] == ',') {
            ++pos;
            vec.push_back(interval());
            skip_ws();
        }
        expect('>');
        return normalize_constraints(std::move(vec));
    }
};

}  // namespace

Program parse_program(const std::string& text) {
    Program prog;
    std::map<std::string, int> var_lines;
    std::map<std::pair<std::string, std::string>, int> edge_lines;
    std::vector<std::tuple<std::string, std::string, int>> edge_refs;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto cut = raw.find("//"); cut != std::string::npos) raw.resize(cut);
        LineLexer lex{raw, line_no};
        if (lex.at_end()) continue;

        if (lex.try_word("node")) {
            std::string var = lex.ident();
            auto cs = lex.constraint_vector();
            if (!lex.at_end()) lex.fail("trailing input after node description");
            if (!var_lines.emplace(var, line_no).second) {
                throw ParseError("duplicate node variable '" + var + "'", line_no, 1);
            }
            prog.nodes.push_back({std::move(var), std::move(cs)});
        } else if (lex.try_word("edge")) {
            lex.expect('(');
            std::string src = lex.ident();
            lex.expect(',');
            std::string dst = lex.ident();
            lex.expect(')');
            auto cs = lex.constraint_vector();
            if (!lex.at_end()) lex.fail("trailing input after edge description");
            if (!edge_lines.emplace(std::make_pair(src, dst), line_no).second) {
                throw ParseError("duplicate edge description (" + src + ", " + dst + ")",
                                 line_no, 1);
            }
            edge_refs.emplace_back(src, dst, line_no);
            prog.edges.push_back({std::move(src), std::move(dst), std::move(cs)});
        } else {
            lex.fail("expected 'node' or 'edge'");
        }
    }

    for (const auto& [src, dst, at] : edge_refs) {
        if (!var_lines.count(src)) {
            throw ParseError("undeclared variable '" + src + "' in edge description", at, 1);
        }
        if (!var_lines.count(dst)) {
            throw ParseError("undeclared variable '" + dst + "' in edge description", at, 1);
        }
    }
    return prog;
}

namespace {

void append_constraints(std::string& out, const std::optional<IntervalVec>& cs) {
    if (!cs) return;
    out += " <";
    for (std::size_t i = 0; i < cs->size(); ++i) {
        if (i) out += ", ";
        out += '[';
        out += format_real((*cs)[i].lo);
        out += ", ";
        out += format_real((*cs)[i].hi);
        out += ']';
    }
    out += '>';
}

}  // namespace

std::string print_program(const Program& p) {
    std::string out;
    for (const NodeDescription& nd : p.nodes) {
        out += "node ";
        out += nd.var;
        append_constraints(out, nd.constraints);
        out += '\n';
    }
    for (const EdgeDescription& ed : p.edges) {
        out += "edge (";
        out += ed.src;
        out += ", ";
        out += ed.dst;
        out += ')';
        append_constraints(out, ed.constraints);
        out += '\n';
    }
    return out;
}

std::optional<std::string> validate_against_dataset(const Program& p, int d, int c) {
    for (const NodeDescription& nd : p.nodes) {
        if (nd.constraints && static_cast<int>(nd.constraints->size()) != d) {
            return "node '" + nd.var + "' has " + std::to_string(nd.constraints->size()) +
                   " intervals, dataset node features have dimension " + std::to_string(d);
        }
    }
    for (const EdgeDescription& ed : p.edges) {
        if (ed.constraints && static_cast<int>(ed.constraints->size()) != c) {
            return "edge (" + ed.src + ", " + ed.dst + ") has " +
                   std::to_string(ed.constraints->size()) +
                   " intervals, dataset edge features have dimension " + std::to_string(c);
        }
    }
    return std::nullopt;
}

namespace {

std::string constraints_key(const std::optional<IntervalVec>& cs) {
    if (!cs) return std::string();
    std::string key;
    for (const Interval& itv : *cs) {
        key += format_real(itv.lo);
        key += ',';
        key += format_real(itv.hi);
        key += ';';
    }
    return key;
}

}  // namespace

bool equivalent_programs(const Program& a, const Program& b) {
    auto sorted = [](Program p) {
        std::sort(p.nodes.begin(), p.nodes.end(),
                  [](const NodeDescription& x, const NodeDescription& y) { return x.var < y.var; });
        std::sort(p.edges.begin(), p.edges.end(),
                  [](const EdgeDescription& x, const EdgeDescription& y) {
                      return std::tie(x.src, x.dst) < std::tie(y.src, y.dst);
                  });
        return p;
    };
    return sorted(a) == sorted(b);
}

Program canonicalize_program(const Program& p) {
    std::vector<std::size_t> order(p.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::string> keys(p.nodes.size());
    for (std::size_t i = 0; i < p.nodes.size(); ++i) keys[i] = constraints_key(p.nodes[i].constraints);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(keys[a], p.nodes[a].var) < std::tie(keys[b], p.nodes[b].var);
    });

    std::map<std::string, std::string> rename;
    Program out;
    out.nodes.reserve(p.nodes.size());
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const NodeDescription& nd = p.nodes[order[rank]];
        std::string fresh = "v" + std::to_string(rank);
        rename[nd.var] = fresh;
        out.nodes.push_back({std::move(fresh), nd.constraints});
    }
    out.edges.reserve(p.edges.size());
    for (const EdgeDescription& ed : p.edges) {
        out.edges.push_back({rename.at(ed.src), rename.at(ed.dst), ed.constraints});
    }
    std::sort(out.edges.begin(), out.edges.end(),
              [](const EdgeDescription& a, const EdgeDescription& b) {
                  auto key = [](const EdgeDescription& e) {
                      // v10 must sort after v9: compare by numeric suffix
                      return std::make_tuple(e.src.size(), std::cref(e.src), e.dst.size(),
                                             std::cref(e.dst));
                  };
                  if (key(a) != key(b)) return key(a) < key(b);
                  return constraints_key(a.constraints) < constraints_key(b.constraints);
              });
    return out;
}

std::string canonical_text(const Program& p) {
    return print_program(canonicalize_program(p));
}

}  // namespace gdlnn
