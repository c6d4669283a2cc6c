#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nhsteer {

// Indices are 1-based throughout, matching the ordering ≺ of the basis.
struct HallElement {
  int index = 0;
  int length = 1;
  int generator = 0;  // 1..m for generators, 0 for brackets
  int left = 0;       // bracket factors, 0 for generators
  int right = 0;
  int phi = 0;
  std::vector<int> alpha;  // alpha[l-1] = multiplicity of index l
  std::vector<int> delta;  // generator occurrence counts
  int class_id = 0;        // 1-based position in the class list

  bool is_generator() const { return generator > 0; }
};

class HallBasis {
 public:
  int m = 0;
  int r = 0;
  std::vector<HallElement> elements;
  std::vector<int> level_dims;    // level_dims[s-1] = number of elements of length <= s
  std::vector<int> free_weights;  // free_weights[j-1] = length of element j
  std::vector<std::vector<int>> classes;

  int size() const { return static_cast<int>(elements.size()); }
  const HallElement& at(int j) const { return elements.at(static_cast<std::size_t>(j - 1)); }
  int dim(int s) const { return s <= 0 ? 0 : level_dims.at(static_cast<std::size_t>(std::min(s, r) - 1)); }
  // Index of [left, right] or 0 when it is not a basis element.
  int find(int left, int right) const;
  std::string bracket_string(int j) const;
};

HallBasis build_hall_basis(int m, int r);

// phi(j) and alpha_j from the expansion I_j = [I_k1, [I_k2, ..., [I_ki, I_phi]...]].
std::pair<int, std::vector<int>> hall_decompose(const HallBasis& basis, int j);

// Partition by equal delta vectors, ordered by smallest member.
std::vector<std::vector<int>> equivalence_classes(const HallBasis& basis);

// Evaluates X_{I_1..I_count} for fields indexed 0..m-1, memoizing subbrackets.
template <class Field>
std::vector<Field> evaluate_brackets(const HallBasis& basis, int count, const std::vector<Field>& fields,
                                     const std::function<Field(const Field&, const Field&)>& bracket) {
  std::vector<Field> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) {
    const HallElement& e = basis.at(j);
    if (e.is_generator()) out.push_back(fields.at(static_cast<std::size_t>(e.generator - 1)));
    else out.push_back(bracket(out[static_cast<std::size_t>(e.left - 1)], out[static_cast<std::size_t>(e.right - 1)]));
  }
  return out;
}

template <class Field>
Field evaluate_bracket(const HallBasis& basis, int j, const std::vector<Field>& fields,
                       const std::function<Field(const Field&, const Field&)>& bracket) {
  const HallElement& e = basis.at(j);
  if (e.is_generator()) return fields.at(static_cast<std::size_t>(e.generator - 1));
  return bracket(evaluate_bracket(basis, e.left, fields, bracket), evaluate_bracket(basis, e.right, fields, bracket));
}

}  // namespace nhsteer
