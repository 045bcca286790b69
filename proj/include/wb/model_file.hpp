#pragma once

// Text files holding variables, domains, motivic and exponential functions,
// and transfer statements.
//
//   # comment
//   var x : VF
//   domain D := 0 <= ord(x)
//   motivic f {
//     term { alpha: -ord(x); beta: ord(x) + 1; fiber(r=1; u): u * u = ac(x); geom: [-2] }
//   }
//   exp h {
//     term { f: f; fiber(r=0): true; g: x; gshift: -2; e: 0 }
//   }
//   statement s1 : integrable f over x on O
//   twists 1, 2
//
// A ZZ function is a ZZ term or "graph(z in [lo, hi]): <formula>"; VF and RF
// functions are terms or "graph(w): <formula>". The domain O is built in:
// "O" means every integration variable lies in the valuation ring, "O(x)"
// names the variable.

#include <string>
#include <string_view>
#include <vector>

#include "wb/motivic.hpp"

namespace wb {

struct ModelFile {
    std::vector<VarDecl> vars;
    std::vector<std::pair<std::string, FormulaPtr>> domains;
    std::vector<MotivicFunction> motivic;
    std::vector<MotivicExpFunction> exps;
    std::vector<std::pair<std::string, std::string>> statements; ///< name, statement text
    std::vector<std::int64_t> twists;

    SortEnv env() const;
    const MotivicFunction* find_motivic(std::string_view name) const;
    const MotivicExpFunction* find_exp(std::string_view name) const;
    const FormulaPtr* find_domain(std::string_view name) const;
};

ModelFile parse_model_file(std::string_view text);

/// Formula of a domain reference: a declared domain name, "O", "O(x, y)", or
/// an inline formula in braces. "O" constrains every VF variable of `over`.
FormulaPtr resolve_domain(const ModelFile& file, std::string_view ref, const std::vector<VarDecl>& over);

/// Free variables (excluding fiber and graph variables) that a function reads,
/// in declaration order of the file.
std::vector<VarDecl> function_vars(const ModelFile& file, const MotivicFunction& f);
std::vector<VarDecl> function_vars(const ModelFile& file, const MotivicExpFunction& f);

} // namespace wb
