#include "nhsteer/hall.hpp"

#include <map>

#include "nhsteer/errors.hpp"

namespace nhsteer {

int HallBasis::find(int left, int right) const {
  for (const auto& e : elements)
    if (!e.is_generator() && e.left == left && e.right == right) return e.index;
  return 0;
}

std::string HallBasis::bracket_string(int j) const {
  const HallElement& e = at(j);
  if (e.is_generator()) return "X" + std::to_string(e.generator);
  return "[" + bracket_string(e.left) + "," + bracket_string(e.right) + "]";
}

HallBasis build_hall_basis(int m, int r) {
  if (m < 1 || r < 1) throw Error(ErrorCode::InvalidArgument, "hall basis needs m >= 1 and r >= 1");
  HallBasis b;
  b.m = m;
  b.r = r;
  for (int i = 1; i <= m; ++i) {
    HallElement e;
    e.index = i;
    e.length = 1;
    e.generator = i;
    e.delta.assign(static_cast<std::size_t>(m), 0);
    e.delta[static_cast<std::size_t>(i - 1)] = 1;
    b.elements.push_back(e);
  }
  b.level_dims.push_back(m);
  for (int len = 2; len <= r; ++len) {
    int existing = static_cast<int>(b.elements.size());
    std::vector<HallElement> fresh;
    for (int u = 1; u <= existing; ++u) {
      for (int v = u + 1; v <= existing; ++v) {
        const HallElement& eu = b.at(u);
        const HallElement& ev = b.at(v);
        if (eu.length + ev.length != len) continue;
        if (!ev.is_generator() && ev.left > u) continue;
        HallElement e;
        e.length = len;
        e.left = u;
        e.right = v;
        e.delta.assign(static_cast<std::size_t>(m), 0);
        for (int i = 0; i < m; ++i) e.delta[static_cast<std::size_t>(i)] = eu.delta[static_cast<std::size_t>(i)] + ev.delta[static_cast<std::size_t>(i)];
        fresh.push_back(e);
      }
    }
    for (auto& e : fresh) {
      e.index = static_cast<int>(b.elements.size()) + 1;
      b.elements.push_back(e);
    }
    b.level_dims.push_back(static_cast<int>(b.elements.size()));
  }
  int n = b.size();
  for (auto& e : b.elements) {
    b.free_weights.push_back(e.length);
    auto [phi, alpha] = hall_decompose(b, e.index);
    e.phi = phi;
    e.alpha = alpha;
    e.alpha.resize(static_cast<std::size_t>(n), 0);
  }
  b.classes = equivalence_classes(b);
  for (std::size_t c = 0; c < b.classes.size(); ++c)
    for (int j : b.classes[c]) b.elements[static_cast<std::size_t>(j - 1)].class_id = static_cast<int>(c) + 1;
  return b;
}

std::pair<int, std::vector<int>> hall_decompose(const HallBasis& basis, int j) {
  std::vector<int> alpha(static_cast<std::size_t>(basis.size()), 0);
  int k = j;
  while (!basis.at(k).is_generator()) {
    const HallElement& e = basis.at(k);
    alpha[static_cast<std::size_t>(e.left - 1)] += 1;
    k = e.right;
  }
  return {basis.at(k).generator, alpha};
}

std::vector<std::vector<int>> equivalence_classes(const HallBasis& basis) {
  std::vector<std::vector<int>> classes;
  std::map<std::vector<int>, std::size_t> by_delta;
  for (const auto& e : basis.elements) {
    auto it = by_delta.find(e.delta);
    if (it == by_delta.end()) {
      by_delta.emplace(e.delta, classes.size());
      classes.push_back({e.index});
    } else {
      classes[it->second].push_back(e.index);
    }
  }
  // Elements are visited in index order, so classes already sit in order of
  // their smallest member.
  return classes;
}

}  // namespace nhsteer
