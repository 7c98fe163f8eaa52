#pragma once
// Parser and canonical printer for Tony Cassandra's .pomdp file format.
//
// Supported grammar (tokens separated by whitespace, '#' starts a comment,
// ':' is its own token):
//   discount: <float>
//   values: reward | cost
//   states|actions|observations: <count> | <name...>
//   start: <belief row> | uniform | <state>
//   T: a [: s [: s']]   followed by a value, a row, a matrix, or the
//                       keywords uniform / identity
//   O: a [: s' [: o]]   likewise (matrix rows indexed by s', columns by o)
//   R: a : s [: s' [: o]]  followed by a value, a row over o, or an
//                          s' x o matrix
// '*' in any index position expands over that index. Identifiers may be
// given by name or by 0-based position. More specific declarations override
// wildcard ones regardless of file order; equally specific duplicates are
// rejected.

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pomdpml/model.hpp"

namespace pomdpml {

struct SyntaxError : Error {
    int line, column;
    SyntaxError(const std::string& what, int line_, int col_)
        : Error(what + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
          line(line_),
          column(col_) {}
};

struct UnknownIdentifier : SyntaxError {
    using SyntaxError::SyntaxError;
};

struct DuplicateDeclaration : SyntaxError {
    using SyntaxError::SyntaxError;
};

struct BadDistribution : Error {
    using Error::Error;
};

namespace detail {

struct Token {
    std::string text;
    int line, col;
};

inline std::vector<Token> tokenize(std::istream& in) {
    std::vector<Token> toks;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t i = 0;
        while (i < line.size()) {
            if (std::isspace(static_cast<unsigned char>(line[i]))) {
                ++i;
                continue;
            }
            if (line[i] == ':') {
                toks.push_back({":", lineno, static_cast<int>(i + 1)});
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j])) &&
                   line[j] != ':')
                ++j;
            toks.push_back({line.substr(i, j - i), lineno, static_cast<int>(i + 1)});
            i = j;
        }
    }
    return toks;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

/// Renormalizes a probability row that is off by at most `band`; rows already
/// within 1e-12 of one are left untouched so reparsing printed output is
/// bit-stable.
inline void renormalize_row(double* row, std::size_t n, double band, const std::string& where) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (row[i] < 0.0) throw BadDistribution("negative probability in " + where);
        sum += row[i];
    }
    if (std::abs(sum - 1.0) <= 1e-12) return;
    if (std::abs(sum - 1.0) > band)
        throw BadDistribution(where + " sums to " + std::to_string(sum) +
                              ", outside the renormalization band");
    for (std::size_t i = 0; i < n; ++i) row[i] /= sum;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Parser production: preamble plus the ordered declaration payloads.
struct RawPomdpFile {
    double discount = 1.0;
    bool cost_values = false;
    std::vector<std::string> states, actions, observations;
    std::optional<std::vector<std::string>> start_tokens;

    // Dense payload tables in declaration-resolved form, plus per-cell
    // specificity used for wildcard refinement (-1 = never assigned).
    Tensor3 transition;                 // [a](s, s')
    Tensor3 emission;                   // [a](s', o)
    std::vector<double> reward;         // [a][s][s'][o] flattened
    std::vector<signed char> t_spec, o_spec, r_spec;
};

class Parser {
  public:
    explicit Parser(std::istream& in) : toks_(detail::tokenize(in)) {}

    PomdpInstance parse() {
        parse_preamble();
        parse_declarations();
        return assemble();
    }

  private:
    std::vector<detail::Token> toks_;
    std::size_t pos_ = 0;
    RawPomdpFile raw_;
    std::size_t S_ = 0, A_ = 0, O_ = 0;

    static constexpr double kRenormBand = 1e-4;

    [[noreturn]] void fail(const std::string& what) const {
        const auto& t = pos_ < toks_.size() ? toks_[pos_ == 0 ? 0 : pos_ - 1] : toks_.back();
        throw SyntaxError(what, t.line, t.col);
    }

    bool at_end() const { return pos_ >= toks_.size(); }
    const detail::Token& peek() const {
        if (at_end()) throw SyntaxError("unexpected end of file", toks_.empty() ? 0 : toks_.back().line, 0);
        return toks_[pos_];
    }
    detail::Token next() {
        const auto& t = peek();
        ++pos_;
        return t;
    }

    static bool is_section_keyword(const std::string& s) {
        return s == "discount" || s == "values" || s == "states" || s == "actions" ||
               s == "observations" || s == "start" || s == "T" || s == "O" || s == "R";
    }

    /// True when the cursor sits on `keyword :`.
    bool at_keyword() const {
        if (at_end()) return false;
        const auto& t = toks_[pos_];
        if (!is_section_keyword(t.text)) return false;
        return pos_ + 1 < toks_.size() && toks_[pos_ + 1].text == ":";
    }

    void expect_colon() {
        if (at_end() || peek().text != ":") fail("expected ':'");
        ++pos_;
    }

    std::vector<std::string> read_until_keyword() {
        std::vector<std::string> out;
        while (!at_end() && !at_keyword()) out.push_back(next().text);
        return out;
    }

    void parse_preamble() {
        bool have_states = false, have_actions = false, have_obs = false;
        while (!at_end()) {
            if (!at_keyword()) fail("expected a section keyword");
            const std::string kw = peek().text;
            if (kw == "T" || kw == "O" || kw == "R") break;
            ++pos_;
            expect_colon();
            if (kw == "discount") {
                double v;
                if (!detail::parse_double(next().text, v)) fail("bad discount value");
                raw_.discount = v;
            } else if (kw == "values") {
                const std::string v = next().text;
                if (v == "cost")
                    raw_.cost_values = true;
                else if (v != "reward")
                    fail("values must be 'reward' or 'cost'");
            } else if (kw == "states" || kw == "actions" || kw == "observations") {
                auto names = read_until_keyword();
                if (names.empty()) fail("empty name list for " + kw);
                if (names.size() == 1) {
                    // a bare count declares anonymous indices
                    unsigned long n = 0;
                    bool numeric = !names[0].empty() &&
                                   names[0].find_first_not_of("0123456789") == std::string::npos;
                    if (numeric) {
                        n = std::stoul(names[0]);
                        names.clear();
                        for (unsigned long k = 0; k < n; ++k) names.push_back(std::to_string(k));
                    }
                }
                for (std::size_t i = 0; i < names.size(); ++i)
                    for (std::size_t j = i + 1; j < names.size(); ++j)
                        if (names[i] == names[j]) fail("duplicate name '" + names[i] + "' in " + kw);
                if (kw == "states") {
                    raw_.states = names;
                    have_states = true;
                } else if (kw == "actions") {
                    raw_.actions = names;
                    have_actions = true;
                } else {
                    raw_.observations = names;
                    have_obs = true;
                }
            } else if (kw == "start") {
                raw_.start_tokens = read_until_keyword();
            } else {
                fail("keyword '" + kw + "' not allowed in preamble");
            }
        }
        if (!have_states || !have_actions || !have_obs)
            fail("preamble must declare states, actions and observations");
        S_ = raw_.states.size();
        A_ = raw_.actions.size();
        O_ = raw_.observations.size();
        raw_.transition = Tensor3(A_, S_, S_, 0.0);
        raw_.emission = Tensor3(A_, S_, O_, 0.0);
        raw_.reward.assign(A_ * S_ * S_ * O_, 0.0);
        raw_.t_spec.assign(A_ * S_ * S_, -1);
        raw_.o_spec.assign(A_ * S_ * O_, -1);
        raw_.r_spec.assign(A_ * S_ * S_ * O_, -1);
    }

    struct IndexSet {
        std::vector<std::size_t> ids;
        bool wildcard;
    };

    IndexSet resolve(const std::string& tok, const std::vector<std::string>& names,
                     const detail::Token& where) const {
        if (tok == "*") {
            IndexSet out{{}, true};
            for (std::size_t i = 0; i < names.size(); ++i) out.ids.push_back(i);
            return out;
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == tok) return {{i}, false};
        // fall back to a 0-based position
        if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string::npos) {
            const unsigned long v = std::stoul(tok);
            if (v < names.size()) return {{v}, false};
        }
        throw UnknownIdentifier("unknown identifier '" + tok + "'", where.line, where.col);
    }

    std::vector<double> read_numbers(std::size_t expected) {
        std::vector<double> out;
        out.reserve(expected);
        while (out.size() < expected) {
            if (at_end() || at_keyword()) fail("expected " + std::to_string(expected) + " numbers");
            double v;
            if (!detail::parse_double(peek().text, v)) fail("expected a number, got '" + peek().text + "'");
            ++pos_;
            out.push_back(v);
        }
        return out;
    }

    void assign(std::vector<signed char>& spec, Vec& table, std::size_t flat, double value,
                signed char level, const detail::Token& where) {
        if (spec[flat] == level)
            throw DuplicateDeclaration("conflicting declaration of equal specificity", where.line,
                                       where.col);
        if (spec[flat] < level) {
            table[flat] = value;
            spec[flat] = level;
        }
    }

    void parse_declarations() {
        while (!at_end()) {
            if (!at_keyword()) fail("expected T:, O: or R:");
            const detail::Token head = next();
            expect_colon();
            if (head.text == "T" || head.text == "O")
                parse_prob_decl(head);
            else if (head.text == "R")
                parse_reward_decl(head);
            else
                fail("section '" + head.text + "' must precede T/O/R declarations");
        }
    }

    // Collects `a [: x [: y]]` headers; returns the per-position tokens.
    std::vector<detail::Token> read_segments(std::size_t max_segments) {
        std::vector<detail::Token> segs;
        segs.push_back(next());
        while (segs.size() < max_segments && !at_end() && peek().text == ":") {
            ++pos_;
            segs.push_back(next());
        }
        return segs;
    }

    void parse_prob_decl(const detail::Token& head) {
        const bool is_T = head.text == "T";
        const std::size_t rows = S_;                 // s for T, s' for O
        const std::size_t cols = is_T ? S_ : O_;     // s' for T, o for O
        const auto& row_names = raw_.states;
        const auto& col_names = is_T ? raw_.states : raw_.observations;
        Tensor3& table = is_T ? raw_.transition : raw_.emission;
        std::vector<signed char>& spec = is_T ? raw_.t_spec : raw_.o_spec;

        auto segs = read_segments(3);
        const IndexSet as = resolve(segs[0].text, raw_.actions, segs[0]);
        signed char level = as.wildcard ? 0 : 1;
        auto flat = [&](std::size_t a, std::size_t r, std::size_t c) {
            return (a * rows + r) * cols + c;
        };

        if (segs.size() == 3) {
            const IndexSet rs = resolve(segs[1].text, row_names, segs[1]);
            const IndexSet cs = resolve(segs[2].text, col_names, segs[2]);
            level += (rs.wildcard ? 0 : 1) + (cs.wildcard ? 0 : 1);
            const double v = read_numbers(1)[0];
            for (auto a : as.ids)
                for (auto r : rs.ids)
                    for (auto c : cs.ids) assign(spec, table.data(), flat(a, r, c), v, level, head);
            return;
        }
        if (segs.size() == 2) {
            const IndexSet rs = resolve(segs[1].text, row_names, segs[1]);
            level += rs.wildcard ? 0 : 1;
            if (!at_end() && peek().text == "uniform") {
                ++pos_;
                for (auto a : as.ids)
                    for (auto r : rs.ids)
                        for (std::size_t c = 0; c < cols; ++c)
                            assign(spec, table.data(), flat(a, r, c), 1.0 / cols, level, head);
                return;
            }
            const auto row = read_numbers(cols);
            for (auto a : as.ids)
                for (auto r : rs.ids)
                    for (std::size_t c = 0; c < cols; ++c)
                        assign(spec, table.data(), flat(a, r, c), row[c], level, head);
            return;
        }
        // one segment: keyword or full matrix
        if (!at_end() && (peek().text == "uniform" || peek().text == "identity")) {
            const std::string kw = next().text;
            if (kw == "identity" && rows != cols)
                fail("'identity' requires a square table");
            for (auto a : as.ids)
                for (std::size_t r = 0; r < rows; ++r)
                    for (std::size_t c = 0; c < cols; ++c) {
                        const double v = kw == "uniform" ? 1.0 / cols : (r == c ? 1.0 : 0.0);
                        assign(spec, table.data(), flat(a, r, c), v, level, head);
                    }
            return;
        }
        const auto mat = read_numbers(rows * cols);
        for (auto a : as.ids)
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    assign(spec, table.data(), flat(a, r, c), mat[r * cols + c], level, head);
    }

    void parse_reward_decl(const detail::Token& head) {
        auto segs = read_segments(4);
        if (segs.size() < 2) fail("R: needs at least an action and a state");
        const IndexSet as = resolve(segs[0].text, raw_.actions, segs[0]);
        const IndexSet ss = resolve(segs[1].text, raw_.states, segs[1]);
        signed char level = (as.wildcard ? 0 : 1) + (ss.wildcard ? 0 : 1);
        auto flat = [&](std::size_t a, std::size_t s, std::size_t s2, std::size_t o) {
            return ((a * S_ + s) * S_ + s2) * O_ + o;
        };
        if (segs.size() == 4) {
            const IndexSet s2s = resolve(segs[2].text, raw_.states, segs[2]);
            const IndexSet os = resolve(segs[3].text, raw_.observations, segs[3]);
            level += (s2s.wildcard ? 0 : 1) + (os.wildcard ? 0 : 1);
            const double v = read_numbers(1)[0];
            for (auto a : as.ids)
                for (auto s : ss.ids)
                    for (auto s2 : s2s.ids)
                        for (auto o : os.ids)
                            assign(raw_.r_spec, raw_.reward, flat(a, s, s2, o), v, level, head);
        } else if (segs.size() == 3) {
            const IndexSet s2s = resolve(segs[2].text, raw_.states, segs[2]);
            level += s2s.wildcard ? 0 : 1;
            const auto row = read_numbers(O_);
            for (auto a : as.ids)
                for (auto s : ss.ids)
                    for (auto s2 : s2s.ids)
                        for (std::size_t o = 0; o < O_; ++o)
                            assign(raw_.r_spec, raw_.reward, flat(a, s, s2, o), row[o], level, head);
        } else {
            const auto mat = read_numbers(S_ * O_);
            for (auto a : as.ids)
                for (auto s : ss.ids)
                    for (std::size_t s2 = 0; s2 < S_; ++s2)
                        for (std::size_t o = 0; o < O_; ++o)
                            assign(raw_.r_spec, raw_.reward, flat(a, s, s2, o),
                                   mat[s2 * O_ + o], level, head);
        }
    }

    PomdpInstance assemble() {
        PomdpInstance m;
        m.states = raw_.states;
        m.actions = raw_.actions;
        m.observations = raw_.observations;
        m.discount = raw_.discount;
        m.transition = raw_.transition;
        m.emission_raw = raw_.emission;

        for (std::size_t a = 0; a < A_; ++a)
            for (std::size_t s = 0; s < S_; ++s)
                detail::renormalize_row(&m.transition.data()[(a * S_ + s) * S_], S_, kRenormBand,
                                        "transition row (a=" + raw_.actions[a] + ",s=" + raw_.states[s] + ")");
        for (std::size_t a = 0; a < A_; ++a)
            for (std::size_t s = 0; s < S_; ++s)
                detail::renormalize_row(&m.emission_raw.data()[(a * S_ + s) * O_], O_, kRenormBand,
                                        "emission row (a=" + raw_.actions[a] + ",s'=" + raw_.states[s] + ")");

        // collapse the per-action emissions when all slices agree
        m.emission = Matrix(S_, O_);
        for (std::size_t s = 0; s < S_; ++s)
            for (std::size_t o = 0; o < O_; ++o) m.emission(s, o) = m.emission_raw(0, s, o);
        m.action_dependent_raw = false;
        for (std::size_t a = 1; a < A_ && !m.action_dependent_raw; ++a)
            for (std::size_t s = 0; s < S_ && !m.action_dependent_raw; ++s)
                for (std::size_t o = 0; o < O_; ++o)
                    if (std::abs(m.emission_raw(a, s, o) - m.emission(s, o)) > 1e-9) {
                        m.action_dependent_raw = true;
                        break;
                    }

        // r(s,a) = sum_{s',o} p(s'|s,a) p(o|s',a) R(a,s,s',o); constant
        // payloads short-circuit so the expectation is exact.
        m.reward = Matrix(S_, A_);
        for (std::size_t a = 0; a < A_; ++a)
            for (std::size_t s = 0; s < S_; ++s) {
                const double first = raw_.reward[((a * S_ + s) * S_) * O_];
                bool constant = true;
                for (std::size_t s2 = 0; s2 < S_ && constant; ++s2)
                    for (std::size_t o = 0; o < O_; ++o)
                        if (raw_.reward[((a * S_ + s) * S_ + s2) * O_ + o] != first) {
                            constant = false;
                            break;
                        }
                double r;
                if (constant) {
                    r = first;
                } else {
                    r = 0.0;
                    for (std::size_t s2 = 0; s2 < S_; ++s2) {
                        double inner = 0.0;
                        for (std::size_t o = 0; o < O_; ++o)
                            inner += m.emission_raw(a, s2, o) *
                                     raw_.reward[((a * S_ + s) * S_ + s2) * O_ + o];
                        r += m.transition(a, s, s2) * inner;
                    }
                }
                m.reward(s, a) = raw_.cost_values ? -r : r;
            }

        // initial belief
        if (!raw_.start_tokens || (raw_.start_tokens->size() == 1 && (*raw_.start_tokens)[0] == "uniform")) {
            m.initial_belief = uniform_belief(S_);
        } else {
            const auto& st = *raw_.start_tokens;
            bool numeric_row = st.size() == S_;
            std::vector<double> row(st.size());
            for (std::size_t i = 0; i < st.size() && numeric_row; ++i)
                if (!detail::parse_double(st[i], row[i])) numeric_row = false;
            if (numeric_row && !(S_ == 1 && st[0] == raw_.states[0])) {
                detail::renormalize_row(row.data(), S_, kRenormBand, "start belief");
                m.initial_belief = Belief{std::move(row)};
            } else if (st.size() == 1) {
                Vec point(S_, 0.0);
                bool found = false;
                for (std::size_t s = 0; s < S_; ++s)
                    if (raw_.states[s] == st[0]) {
                        point[s] = 1.0;
                        found = true;
                    }
                if (!found) throw BadDistribution("start state '" + st[0] + "' is not a state");
                m.initial_belief = Belief{std::move(point)};
            } else {
                throw BadDistribution("start: expects 'uniform', a state, or a full belief row");
            }
        }

        auto rep = validate(m);
        if (!rep.ok()) throw BadDistribution("parsed instance fails validation: " + rep.issues.front());
        return m;
    }
};

inline PomdpInstance parse_pomdp(std::istream& in) { return Parser(in).parse(); }

inline PomdpInstance parse_pomdp_string(const std::string& text) {
    std::istringstream in(text);
    return parse_pomdp(in);
}

/**
 * Canonical .pomdp rendering of an instance. Reparsing the output
 * reconstructs the instance field-for-field: probabilities are printed with
 * 17 significant digits and rewards are emitted in the (a,s)-constant form
 * whose expectation is exact.
 */
inline std::string to_canonical_pomdp(const PomdpInstance& m) {
    using detail::fmt_double;
    std::ostringstream out;
    const std::size_t S = m.n_states(), A = m.n_actions(), O = m.n_observations();
    out << "# canonical .pomdp rendering\n";
    out << "discount: " << fmt_double(m.discount) << "\n";
    out << "values: reward\n";
    out << "states:";
    for (const auto& s : m.states) out << ' ' << s;
    out << "\nactions:";
    for (const auto& a : m.actions) out << ' ' << a;
    out << "\nobservations:";
    for (const auto& o : m.observations) out << ' ' << o;
    out << "\nstart:";
    for (std::size_t s = 0; s < S; ++s) out << ' ' << fmt_double(m.initial_belief[s]);
    out << "\n";
    for (std::size_t a = 0; a < A; ++a) {
        out << "\nT: " << m.actions[a] << "\n";
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t s2 = 0; s2 < S; ++s2)
                out << (s2 ? " " : "") << fmt_double(m.transition(a, s, s2));
            out << "\n";
        }
    }
    bool slices_bitwise_equal = true;
    for (std::size_t a = 1; a < A && slices_bitwise_equal; ++a)
        for (std::size_t s = 0; s < S && slices_bitwise_equal; ++s)
            for (std::size_t o = 0; o < O; ++o)
                if (m.emission_raw(a, s, o) != m.emission_raw(0, s, o)) {
                    slices_bitwise_equal = false;
                    break;
                }
    if (m.action_dependent_raw || !slices_bitwise_equal) {
        for (std::size_t a = 0; a < A; ++a) {
            out << "\nO: " << m.actions[a] << "\n";
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t o = 0; o < O; ++o)
                    out << (o ? " " : "") << fmt_double(m.emission_raw(a, s, o));
                out << "\n";
            }
        }
    } else {
        out << "\nO: *\n";
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t o = 0; o < O; ++o)
                out << (o ? " " : "") << fmt_double(m.emission(s, o));
            out << "\n";
        }
    }
    out << "\n";
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < S; ++s)
            out << "R: " << m.actions[a] << " : " << m.states[s] << " : * : * "
                << fmt_double(m.reward(s, a)) << "\n";
    return out.str();
}

}  // namespace pomdpml
