#pragma once

// Pointwise checks of piece families against the codes they refine, on a
// finite grid of points.

#include <string>
#include <vector>

#include "baire/borel.hpp"

namespace baire {

// Heads of length <= depth over {0..branch}, tails const(0). With branch at
// least the largest cylinder entry of a code, every class of the truncated
// grid is represented.
inline std::vector<Point> standard_grid(std::size_t depth = 3, Nat branch = 3) {
  std::vector<Point> out;
  for (const auto& s : all_sequences_upto(depth, branch + 1)) out.push_back(Point::constant(s, 0));
  return out;
}

struct PieceCheck {
  std::size_t points = 0;
  std::size_t evaluations = 0;
  std::size_t unknown = 0;
  std::size_t contradictions = 0;
  std::vector<std::string> notes;  // first few contradictions
  bool passed() const { return contradictions == 0; }
};

// Each piece inside its container, pieces pairwise disjoint, union of the
// pieces equal to `whole`. Points with an Unknown verdict are counted and
// left out of the checks they would decide.
inline PieceCheck check_pieces(const std::vector<BorelCode>& pieces, const std::vector<BorelCode>& containers,
                               const BorelCode& whole, const std::vector<Point>& grid,
                               std::size_t budget = std::size_t{1} << 20) {
  if (pieces.size() != containers.size()) throw std::invalid_argument("one container per piece");
  PieceCheck rep;
  rep.points = grid.size();
  auto judge = [&](const BorelCode& c, const Point& x) {
    ++rep.evaluations;
    auto v = eval_membership(c, x, budget);
    if (v == Verdict::Unknown) ++rep.unknown;
    return v;
  };
  auto flag = [&](const std::string& what, const Point& x) {
    ++rep.contradictions;
    if (rep.notes.size() < 8) rep.notes.push_back(what + " at " + to_string(x));
  };
  for (const auto& x : grid) {
    std::size_t in = 0;
    bool unsure = false;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      auto v = judge(pieces[i], x);
      if (v == Verdict::Unknown) {
        unsure = true;
        continue;
      }
      if (v != Verdict::In) continue;
      ++in;
      if (judge(containers[i], x) == Verdict::Out) flag("piece " + std::to_string(i) + " leaves its container", x);
    }
    if (in > 1) flag("pieces overlap", x);
    auto w = judge(whole, x);
    if (w == Verdict::In && in == 0 && !unsure) flag("point of the union lies in no piece", x);
    if (w == Verdict::Out && in > 0) flag("piece point outside the union", x);
  }
  return rep;
}

// R \ (earlier) with both sides of Π-level <= xi.
inline bool two_pi_shape(const BorelCode& piece, unsigned xi) {
  auto parts = match_difference(piece);
  return parts && classify(parts->first).pi <= xi && classify(parts->second).pi <= xi;
}

}  // namespace baire
