#include "rumdp/model_io.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace rumdp {

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line), column_(column) {}

namespace {

enum class Tok { ident, number, symbol, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        t.column = col_;
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            t.kind = Tok::ident;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                t.text += advance();
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() &&
                                                             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            t.kind = Tok::number;
            bool seen_dot = false;
            while (pos_ < src_.size()) {
                const char d = src_[pos_];
                if (std::isdigit(static_cast<unsigned char>(d))) {
                    t.text += advance();
                } else if (d == '.' && !seen_dot) {
                    seen_dot = true;
                    t.text += advance();
                } else {
                    break;
                }
            }
            return t;
        }
        t.kind = Tok::symbol;
        if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
            t.text = "->";
            advance();
            advance();
            return t;
        }
        if (c == '<' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            t.text = "<=";
            advance();
            advance();
            return t;
        }
        static const std::string singles = "{}[](),;:+-*/=";
        if (singles.find(c) == std::string::npos)
            throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
        t.text = std::string(1, advance());
        return t;
    }

private:
    char advance() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

    Pmdp parse_file();
    Polynomial parse_standalone(const std::vector<std::string>& names) {
        names_ = names;
        auto p = expr();
        if (cur_.kind != Tok::end) fail("unexpected trailing input '" + cur_.text + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur_.line, cur_.column); }

    bool is_symbol(const char* s) const { return cur_.kind == Tok::symbol && cur_.text == s; }
    bool is_keyword(const char* s) const { return cur_.kind == Tok::ident && cur_.text == s; }

    void expect_symbol(const char* s) {
        if (!is_symbol(s)) fail(std::string("expected '") + s + "'" + found());
        cur_ = lex_.next();
    }
    void expect_keyword(const char* s) {
        if (!is_keyword(s)) fail(std::string("expected '") + s + "'" + found());
        cur_ = lex_.next();
    }
    std::string found() const {
        if (cur_.kind == Tok::end) return " but reached end of input";
        return " but found '" + cur_.text + "'";
    }
    std::string ident(const char* what) {
        if (cur_.kind != Tok::ident) fail(std::string("expected ") + what + found());
        auto s = cur_.text;
        cur_ = lex_.next();
        return s;
    }

    Rational signed_number() {
        bool neg = false;
        if (is_symbol("-")) {
            neg = true;
            cur_ = lex_.next();
        }
        Polynomial p = term();
        if (!p.is_constant()) fail("expected a number");
        Rational r = p.constant_term();
        return neg ? Rational(-r) : r;
    }

    Polynomial expr() {
        Polynomial acc = term();
        while (is_symbol("+") || is_symbol("-")) {
            const bool minus = is_symbol("-");
            cur_ = lex_.next();
            Polynomial rhs = term();
            if (minus)
                acc -= rhs;
            else
                acc += rhs;
        }
        return acc;
    }

    Polynomial term() {
        Polynomial acc = unary();
        while (is_symbol("*") || is_symbol("/")) {
            const bool divide = is_symbol("/");
            const auto line = cur_.line;
            const auto col = cur_.column;
            cur_ = lex_.next();
            Polynomial rhs = unary();
            if (divide) {
                if (!rhs.is_constant()) throw ParseError("division by a non-constant expression", line, col);
                const Rational d = rhs.constant_term();
                if (d == 0) throw ParseError("division by zero", line, col);
                acc *= Rational(1) / d;
            } else {
                acc *= rhs;
            }
        }
        return acc;
    }

    Polynomial unary() {
        if (is_symbol("-")) {
            cur_ = lex_.next();
            return -unary();
        }
        if (is_symbol("+")) {
            cur_ = lex_.next();
            return unary();
        }
        return primary();
    }

    Polynomial primary() {
        if (cur_.kind == Tok::number) {
            Rational r;
            try {
                r = parse_rational(cur_.text);
            } catch (const std::exception& e) {
                fail(e.what());
            }
            cur_ = lex_.next();
            return Polynomial::constant(r);
        }
        if (cur_.kind == Tok::ident) {
            auto it = std::find(names_.begin(), names_.end(), cur_.text);
            if (it == names_.end()) fail("unknown parameter '" + cur_.text + "'");
            cur_ = lex_.next();
            return Polynomial::variable(static_cast<std::size_t>(it - names_.begin()));
        }
        if (is_symbol("(")) {
            cur_ = lex_.next();
            Polynomial p = expr();
            expect_symbol(")");
            return p;
        }
        fail("expected an expression" + found());
    }

    void parse_params(ParameterSpace& ps) {
        expect_symbol(":");
        while (true) {
            const auto line = cur_.line;
            const auto col = cur_.column;
            std::string name = ident("parameter name");
            if (is_reserved(name)) throw ParseError("'" + name + "' is a reserved word", line, col);
            if (ps.find(name) != ps.size()) throw ParseError("duplicate parameter '" + name + "'", line, col);
            expect_keyword("in");
            expect_symbol("[");
            Rational lo = signed_number();
            expect_symbol(",");
            Rational hi = signed_number();
            expect_symbol("]");
            if (lo > hi) throw ParseError("empty domain for parameter '" + name + "'", line, col);
            ps.names.push_back(name);
            ps.lower.push_back(lo);
            ps.upper.push_back(hi);
            if (is_symbol(",")) {
                cur_ = lex_.next();
                continue;
            }
            expect_symbol(";");
            break;
        }
        names_ = ps.names;
    }

    static bool is_reserved(const std::string& s) {
        static const char* words[] = {"params", "in", "state", "action", "reward", "init", "target", "constraint",
                                      "actions"};
        for (auto* w : words)
            if (s == w) return true;
        return false;
    }

    Lexer lex_;
    Token cur_;
    std::vector<std::string> names_;
};

struct RawTransition {
    std::string target;
    Polynomial prob;
    std::size_t line, column;
};

struct RawChoice {
    std::string state;
    std::string action;
    std::vector<RawTransition> transitions;
    std::size_t line, column;
};

Pmdp Parser::parse_file() {
    ParameterSpace ps;
    bool have_params = false;
    std::vector<LinearConstraint> constraints;
    std::vector<std::string> action_order;
    std::vector<std::string> state_order;
    std::vector<RawChoice> raw;
    struct RawReward {
        std::string state, action;
        Rational value;
        std::size_t line, column;
    };
    std::vector<RawReward> rewards;
    std::optional<std::pair<std::string, std::pair<std::size_t, std::size_t>>> init;
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> targets;

    while (cur_.kind != Tok::end) {
        const auto line = cur_.line;
        const auto col = cur_.column;
        if (is_keyword("params")) {
            if (have_params) fail("parameters declared twice");
            cur_ = lex_.next();
            parse_params(ps);
            have_params = true;
        } else if (is_keyword("constraint")) {
            cur_ = lex_.next();
            Polynomial lhs = expr();
            expect_symbol("<=");
            Polynomial rhs = expr();
            expect_symbol(";");
            Polynomial diff = lhs - rhs;
            if (!diff.is_linear()) throw ParseError("constraint must be linear", line, col);
            Rational c = diff.constant_term();
            diff -= Polynomial::constant(c);
            constraints.push_back(LinearConstraint{diff, -c});
        } else if (is_keyword("actions")) {
            cur_ = lex_.next();
            expect_symbol(":");
            while (true) {
                action_order.push_back(ident("action name"));
                if (is_symbol(",")) {
                    cur_ = lex_.next();
                    continue;
                }
                expect_symbol(";");
                break;
            }
        } else if (is_keyword("init")) {
            cur_ = lex_.next();
            auto name = ident("state name");
            expect_symbol(";");
            init = {name, {line, col}};
        } else if (is_keyword("target")) {
            cur_ = lex_.next();
            while (true) {
                const auto tl = cur_.line;
                const auto tc = cur_.column;
                targets.push_back({ident("state name"), {tl, tc}});
                if (is_symbol(",")) {
                    cur_ = lex_.next();
                    continue;
                }
                expect_symbol(";");
                break;
            }
        } else if (is_keyword("state")) {
            cur_ = lex_.next();
            const auto sl = cur_.line;
            const auto sc = cur_.column;
            std::string sname = ident("state name");
            if (std::find(state_order.begin(), state_order.end(), sname) != state_order.end())
                throw ParseError("duplicate state '" + sname + "'", sl, sc);
            state_order.push_back(sname);
            expect_symbol("{");
            while (is_keyword("action")) {
                const auto al = cur_.line;
                const auto ac = cur_.column;
                cur_ = lex_.next();
                RawChoice rc{sname, ident("action name"), {}, al, ac};
                expect_symbol("{");
                while (is_symbol("->")) {
                    cur_ = lex_.next();
                    const auto tl = cur_.line;
                    const auto tc = cur_.column;
                    std::string tgt = ident("successor state");
                    expect_symbol(":");
                    Polynomial p = expr();
                    expect_symbol(";");
                    rc.transitions.push_back(RawTransition{tgt, p, tl, tc});
                }
                expect_symbol("}");
                raw.push_back(std::move(rc));
            }
            expect_symbol("}");
        } else if (is_keyword("reward")) {
            cur_ = lex_.next();
            RawReward r;
            r.line = line;
            r.column = col;
            r.state = ident("state name");
            r.action = ident("action name");
            expect_symbol("=");
            Polynomial v = expr();
            expect_symbol(";");
            if (!v.is_constant()) throw ParseError("reward must be a constant", line, col);
            r.value = v.constant_term();
            rewards.push_back(std::move(r));
        } else {
            fail("expected a declaration" + found());
        }
    }

    ps.constraints = std::move(constraints);
    PmdpBuilder b(ps);
    for (const auto& a : action_order) b.add_action(a);
    for (const auto& s : state_order) b.add_state(s);
    auto state_id = [&](const std::string& name, std::size_t line, std::size_t col) {
        if (!b.has_state(name)) throw ParseError("undeclared state '" + name + "'", line, col);
        return b.state(name);
    };
    for (auto& rc : raw) {
        std::vector<ParametricTransition> ts;
        for (auto& t : rc.transitions) ts.push_back(ParametricTransition{state_id(t.target, t.line, t.column), t.prob});
        try {
            b.add_choice(b.state(rc.state), b.action(rc.action), std::move(ts));
        } catch (const ModelError& e) {
            throw ParseError(e.what(), rc.line, rc.column);
        }
    }
    for (const auto& r : rewards) {
        const auto s = state_id(r.state, r.line, r.column);
        try {
            b.set_reward(s, b.action(r.action), r.value);
        } catch (const ModelError& e) {
            throw ParseError(e.what(), r.line, r.column);
        }
    }
    if (init) b.set_initial(state_id(init->first, init->second.first, init->second.second));
    for (const auto& [name, pos] : targets) b.add_target(state_id(name, pos.first, pos.second));
    return b.build();
}

} // namespace

Pmdp parse_model(std::string_view text) {
    Parser p(text);
    return p.parse_file();
}

Polynomial parse_expression(std::string_view text, const std::vector<std::string>& names) {
    Parser p(text);
    return p.parse_standalone(names);
}

std::string render_model(const Pmdp& m) {
    const auto& ps = m.params;
    std::ostringstream os;
    os << "params: ";
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i) os << ", ";
        os << ps.names[i] << " in [" << rational_to_string(ps.lower[i]) << ", " << rational_to_string(ps.upper[i])
           << "]";
    }
    os << ";\n";
    for (const auto& c : ps.constraints)
        os << "constraint " << c.lhs.to_string(ps.names) << " <= " << rational_to_string(c.rhs) << ";\n";
    if (!m.actions.empty()) {
        os << "actions: ";
        for (std::size_t a = 0; a < m.actions.size(); ++a) os << (a ? ", " : "") << m.actions[a];
        os << ";\n";
    }
    os << "init " << m.states[m.initial] << ";\n";
    bool any_target = false;
    for (std::size_t s = 0; s < m.num_states(); ++s) {
        if (!m.is_target(s)) continue;
        os << (any_target ? ", " : "target ") << m.states[s];
        any_target = true;
    }
    if (any_target) os << ";\n";
    for (std::size_t s = 0; s < m.num_states(); ++s) {
        os << "state " << m.states[s] << " {\n";
        for (const auto& c : m.choices_of(s)) {
            os << "  action " << m.actions[c.action] << " {\n";
            for (const auto& t : c.transitions)
                os << "    -> " << m.states[t.target] << " : " << t.prob.to_string(ps.names) << ";\n";
            os << "  }\n";
        }
        os << "}\n";
    }
    for (const auto& c : m.choices)
        if (c.reward != 0)
            os << "reward " << m.states[c.state] << " " << m.actions[c.action] << " = " << rational_to_string(c.reward)
               << ";\n";
    return os.str();
}

Pmdp load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

void save_model(const Pmdp& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file '" + path + "'");
    out << render_model(m);
}

} // namespace rumdp
