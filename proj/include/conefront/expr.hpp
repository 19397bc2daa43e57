#pragma once

#include "conefront/core.hpp"

#include <memory>

namespace conefront {

/// Total arithmetic expressions over x1..xd and xi1..xid ("x"/"xi" alias the
/// first coordinates). Grammar keeps evaluation total and positivity
/// checkable: sum := product ('+' product)*; product := atom ('*' atom)*;
/// atom := number | variable | abs(sum) | exp(sum) | pow(atom, int) | (sum).
/// pow exponents must be nonnegative, and even unless the base is abs(...),
/// exp(...) or a number. Division, subtraction and log are not part of the
/// language.
class Expr {
  public:
    static Expr parse(const std::string& text, int dim);

    double eval(const Pt& x, const Pt& xi) const;
    bool depends_on_x() const { return depends_x_; }
    const std::string& text() const { return text_; }

    struct Node;

  private:
    std::shared_ptr<const Node> root_;
    std::string text_;
    bool depends_x_ = false;
};

}  // namespace conefront
