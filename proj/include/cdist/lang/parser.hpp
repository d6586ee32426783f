#ifndef CDIST_LANG_PARSER_HPP
#define CDIST_LANG_PARSER_HPP

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cdist/lang/syntax.hpp"

namespace cdist::lang {

// Names the parser resolves to primitives when they are not bound locally.
struct PrimNames {
    std::set<std::string> reals; // real constants and real operations
    std::set<std::string> dists;
};

namespace detail {

enum class Tok { Ident, Number, Sym, End };

struct Token {
    Tok kind;
    std::string text;
    Loc loc;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> k{"O",   "succ", "pred", "ifz", "then", "else", "fix",  "fst",
                                         "snd", "return", "let", "in", "nat", "real", "dist"};
    return k;
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : s_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip();
            Loc at{line_, col_};
            if (i_ >= s_.size()) {
                out.push_back({Tok::End, "", at});
                return out;
            }
            char c = s_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t st = i_;
                while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' || s_[i_] == '\''))
                    adv();
                out.push_back({Tok::Ident, std::string(s_.substr(st, i_ - st)), at});
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && i_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_ + 1])))) {
                std::size_t st = i_;
                adv();
                while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) adv();
                if (i_ + 1 < s_.size() && s_[i_] == '.' && std::isdigit(static_cast<unsigned char>(s_[i_ + 1]))) {
                    adv();
                    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) adv();
                }
                out.push_back({Tok::Number, std::string(s_.substr(st, i_ - st)), at});
            } else {
                static const char* multi[] = {"->", "<-", "\xCE\xBB", "\xC3\x97", "\xE2\x86\x92", "\xE2\x86\x90"};
                bool matched = false;
                for (const char* m : multi) {
                    std::string_view mv(m);
                    if (s_.substr(i_, mv.size()) == mv) {
                        std::string canon(mv);
                        if (canon == "\xCE\xBB") canon = "\\";
                        if (canon == "\xC3\x97") canon = "*";
                        if (canon == "\xE2\x86\x92") canon = "->";
                        if (canon == "\xE2\x86\x90") canon = "<-";
                        for (std::size_t k = 0; k < mv.size(); ++k) adv(k == 0);
                        out.push_back({Tok::Sym, canon, at});
                        matched = true;
                        break;
                    }
                }
                if (matched) continue;
                if (std::string_view("()\\:.,*").find(c) == std::string_view::npos)
                    throw ParseError(std::string("unexpected character '") + c + "'", at);
                adv();
                out.push_back({Tok::Sym, std::string(1, c), at});
            }
        }
    }

private:
    // count_col is false for UTF-8 continuation bytes.
    void adv(bool count_col = true) {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else if (count_col) {
            ++col_;
        }
        ++i_;
    }
    void skip() {
        for (;;) {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) adv();
            if (s_.substr(i_, 2) == "--") {
                while (i_ < s_.size() && s_[i_] != '\n') adv();
                continue;
            }
            return;
        }
    }

    std::string_view s_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const PrimNames& prims) : t_(std::move(toks)), prims_(prims) {}

    TermPtr program() {
        TermPtr e = expr();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after the end of the term");
        return e;
    }

    TypePtr type_only() {
        TypePtr ty = type();
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after the type");
        return ty;
    }

private:
    const Token& peek() const { return t_[p_]; }
    Token next() { return t_[p_ < t_.size() - 1 ? p_++ : p_]; }
    [[noreturn]] void fail(const std::string& why) const { throw ParseError(why, peek().loc); }

    bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
    bool is_kw(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
    void expect_sym(const char* s) {
        if (!is_sym(s)) fail(std::string("expected '") + s + "'" + found());
        next();
    }
    void expect_kw(const char* s) {
        if (!is_kw(s)) fail(std::string("expected '") + s + "'" + found());
        next();
    }
    std::string found() const {
        return peek().kind == Tok::End ? " but reached the end of input" : " but found '" + peek().text + "'";
    }
    std::string binder_name() {
        if (peek().kind != Tok::Ident || keywords().count(peek().text)) fail("expected a variable name" + found());
        return next().text;
    }

    bool starts_binder() const { return is_sym("\\") || is_kw("ifz") || is_kw("let"); }
    bool starts_prefix() const {
        return is_kw("succ") || is_kw("pred") || is_kw("fix") || is_kw("fst") || is_kw("snd") || is_kw("return");
    }
    bool starts_atom() const {
        const Token& k = peek();
        if (k.kind == Tok::Number) return true;
        if (k.kind == Tok::Sym) return k.text == "(";
        if (k.kind == Tok::Ident) return k.text == "O" || !keywords().count(k.text);
        return false;
    }

    TermPtr expr() {
        if (starts_binder()) return binder();
        return application();
    }

    TermPtr binder() {
        Loc at = peek().loc;
        if (is_sym("\\")) {
            next();
            std::string x = binder_name();
            expect_sym(":");
            TypePtr ty = type();
            expect_sym(".");
            bound_.push_back(x);
            TermPtr body = expr();
            bound_.pop_back();
            return mk(Lam{x, ty, body}, at);
        }
        if (is_kw("ifz")) {
            next();
            TermPtr c = expr();
            expect_kw("then");
            TermPtr a = expr();
            expect_kw("else");
            TermPtr b = expr();
            return mk(Ifz{c, a, b}, at);
        }
        expect_kw("let");
        std::string x = binder_name();
        expect_sym("<-");
        TermPtr m1 = expr();
        expect_kw("in");
        bound_.push_back(x);
        TermPtr m2 = expr();
        bound_.pop_back();
        return mk(Bind{x, m1, m2}, at);
    }

    // Left-associative juxtaposition; a binder form may close the chain.
    TermPtr application() {
        Loc at = peek().loc;
        TermPtr f = prefix();
        for (;;) {
            if (starts_binder()) return mk(App{f, binder()}, at);
            if (!(starts_atom() || starts_prefix())) return f;
            f = mk(App{f, prefix()}, at);
        }
    }

    TermPtr prefix() {
        Loc at = peek().loc;
        if (starts_prefix()) {
            std::string op = next().text;
            TermPtr e = starts_binder() ? binder() : prefix();
            if (op == "succ") return mk(Succ{e}, at);
            if (op == "pred") return mk(Pred{e}, at);
            if (op == "fix") return mk(Fix{e}, at);
            if (op == "fst") return mk(Fst{e}, at);
            if (op == "snd") return mk(Snd{e}, at);
            return mk(Return{e}, at);
        }
        return atom();
    }

    TermPtr atom() {
        Loc at = peek().loc;
        const Token& k = peek();
        if (k.kind == Tok::Number) {
            std::string text = next().text;
            return mk(RealLit{Rational::parse(text)}, at);
        }
        if (k.kind == Tok::Ident) {
            if (k.text == "O") {
                next();
                return mk(Zero{}, at);
            }
            if (keywords().count(k.text)) fail("unexpected keyword '" + k.text + "'");
            std::string name = next().text;
            for (auto it = bound_.rbegin(); it != bound_.rend(); ++it)
                if (*it == name) return mk(Var{name}, at);
            if (prims_.reals.count(name)) return mk(RealPrim{name}, at);
            if (prims_.dists.count(name)) return mk(DistPrim{name}, at);
            return mk(Var{name}, at);
        }
        if (is_sym("(")) {
            next();
            TermPtr a = expr();
            if (is_sym(",")) {
                next();
                TermPtr b = expr();
                expect_sym(")");
                return mk(Pair{a, b}, at);
            }
            expect_sym(")");
            return a;
        }
        fail(peek().kind == Tok::End ? "unexpected end of input" : "unexpected '" + peek().text + "'");
    }

    TypePtr type() {
        TypePtr a = prod_type();
        if (is_sym("->")) {
            next();
            return arrow_t(a, type());
        }
        return a;
    }

    TypePtr prod_type() {
        TypePtr a = type_atom();
        if (is_sym("*")) {
            next();
            return prod_t(a, prod_type());
        }
        return a;
    }

    TypePtr type_atom() {
        if (is_kw("nat")) {
            next();
            return nat_t();
        }
        if (is_kw("real")) {
            next();
            return real_t();
        }
        if (is_kw("dist")) {
            next();
            return dist_t(type_atom());
        }
        if (is_sym("(")) {
            next();
            TypePtr t = type();
            expect_sym(")");
            return t;
        }
        fail("expected a type" + found());
    }

    std::vector<Token> t_;
    std::size_t p_ = 0;
    const PrimNames& prims_;
    std::vector<std::string> bound_;
};

} // namespace detail

// Parses a closed λCD term; free names resolve to primitives in `prims`.
inline TermPtr parse(std::string_view text, const PrimNames& prims) {
    return detail::Parser(detail::Lexer(text).run(), prims).program();
}

inline TypePtr parse_type(std::string_view text) {
    static const PrimNames none;
    return detail::Parser(detail::Lexer(text).run(), none).type_only();
}

} // namespace cdist::lang

#endif
