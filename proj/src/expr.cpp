#include "conefront/expr.hpp"

#include <cctype>
#include <cmath>
#include <memory>

namespace conefront {

struct Expr::Node {
    enum Kind { Sum, Product, Abs, Exp, Pow, Number, Var } kind;
    std::vector<std::shared_ptr<const Node>> args;
    double value = 0.0;   // Number
    int var_axis = 0;     // Var: axis index
    bool var_is_x = false;
    int exponent = 0;     // Pow

    double eval(const Pt& x, const Pt& xi) const {
        switch (kind) {
            case Sum: {
                double s = 0.0;
                for (const auto& a : args) s += a->eval(x, xi);
                return s;
            }
            case Product: {
                double p = 1.0;
                for (const auto& a : args) p *= a->eval(x, xi);
                return p;
            }
            case Abs:
                return std::abs(args[0]->eval(x, xi));
            case Exp:
                return std::exp(args[0]->eval(x, xi));
            case Pow:
                return std::pow(args[0]->eval(x, xi), exponent);
            case Number:
                return value;
            case Var:
                return var_is_x ? x[var_axis] : xi[var_axis];
        }
        return 0.0;
    }
};

namespace {

class Parser {
  public:
    Parser(const std::string& s, int dim) : s_(s), dim_(dim) {}

    using NodePtr = std::shared_ptr<const Expr::Node>;

    NodePtr parse() {
        NodePtr e = sum();
        skip_ws();
        if (pos_ != s_.size()) fail("trailing characters");
        return e;
    }
    bool depends_x = false;

  private:
    [[noreturn]] void fail(const std::string& why) const {
        throw MalformedWeightError("weight expression error at position " + std::to_string(pos_) + ": " + why);
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool consume(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    NodePtr sum() {
        auto node = std::make_shared<Expr::Node>();
        node->kind = Expr::Node::Sum;
        node->args.push_back(product());
        while (consume('+')) node->args.push_back(product());
        if (node->args.size() == 1) return node->args[0];
        return node;
    }
    NodePtr product() {
        auto node = std::make_shared<Expr::Node>();
        node->kind = Expr::Node::Product;
        node->args.push_back(atom());
        while (consume('*')) node->args.push_back(atom());
        if (node->args.size() == 1) return node->args[0];
        return node;
    }
    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of expression");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (consume('(')) {
            NodePtr e = sum();
            if (!consume(')')) fail("expected ')'");
            return e;
        }
        std::string word = identifier();
        if (word == "abs" || word == "exp") {
            if (!consume('(')) fail("expected '(' after " + word);
            auto node = std::make_shared<Expr::Node>();
            node->kind = (word == "abs") ? Expr::Node::Abs : Expr::Node::Exp;
            node->args.push_back(sum());
            if (!consume(')')) fail("expected ')'");
            return node;
        }
        if (word == "pow") {
            if (!consume('(')) fail("expected '(' after pow");
            NodePtr base = atom();
            if (!consume(',')) fail("expected ',' in pow");
            skip_ws();
            size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("pow exponent must be a nonnegative integer");
            int k = std::stoi(s_.substr(start, pos_ - start));
            if (!consume(')')) fail("expected ')'");
            const bool sign_safe = base->kind == Expr::Node::Abs || base->kind == Expr::Node::Exp ||
                                   base->kind == Expr::Node::Number;
            if (k % 2 != 0 && !sign_safe) fail("odd pow exponents require an abs/exp base");
            auto node = std::make_shared<Expr::Node>();
            node->kind = Expr::Node::Pow;
            node->exponent = k;
            node->args.push_back(base);
            return node;
        }
        return variable(word);
    }
    NodePtr number() {
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' || s_[pos_] == 'e' ||
                s_[pos_] == 'E' || ((s_[pos_] == '+' || s_[pos_] == '-') && (s_[pos_ - 1] == 'e' || s_[pos_ - 1] == 'E'))))
            ++pos_;
        auto node = std::make_shared<Expr::Node>();
        node->kind = Expr::Node::Number;
        try {
            node->value = std::stod(s_.substr(start, pos_ - start));
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
        if (node->value < 0.0) fail("negative literals are not allowed");
        return node;
    }
    std::string identifier() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected identifier");
        return s_.substr(start, pos_ - start);
    }
    NodePtr variable(const std::string& word) {
        bool is_x = false;
        int axis = -1;
        if (word == "x" || word == "x1") {
            is_x = true;
            axis = 0;
        } else if (word == "x2") {
            is_x = true;
            axis = 1;
        } else if (word == "xi" || word == "xi1") {
            axis = 0;
        } else if (word == "xi2" || word == "tau") {
            axis = 1;
        } else {
            fail("unknown identifier '" + word + "'");
        }
        if (axis >= dim_) fail("variable '" + word + "' exceeds dimension");
        if (is_x) depends_x = true;
        auto node = std::make_shared<Expr::Node>();
        node->kind = Expr::Node::Var;
        node->var_axis = axis;
        node->var_is_x = is_x;
        return node;
    }

    const std::string& s_;
    int dim_;
    size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(const std::string& text, int dim) {
    Parser p(text, dim);
    Expr e;
    e.root_ = p.parse();
    e.text_ = text;
    e.depends_x_ = p.depends_x;
    return e;
}

double Expr::eval(const Pt& x, const Pt& xi) const { return root_->eval(x, xi); }

}  // namespace conefront
