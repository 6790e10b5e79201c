#pragma once

// Families of Σ⁰₂ reductions read from SeqMap files. A directory stands for
// its *.map files in name order, plus an optional `schedule` file.

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "baire/seqmap_io.hpp"
#include "baire/sigma02.hpp"

namespace baire {

// "rr", "stair", or "custom [prefix] [cycle]".
inline Schedule parse_schedule(const std::string& text, std::size_t n) {
  Cursor c(text);
  std::string kind = c.word();
  if (kind == "rr") {
    c.expect_end();
    return Schedule::round_robin(n);
  }
  if (kind == "stair") {
    c.expect_end();
    return Schedule::staircase(n);
  }
  if (kind == "custom") {
    auto to_idx = [](const FinSeq& s) { return std::vector<std::size_t>(s.begin(), s.end()); };
    FinSeq prefix = parse_finseq(c);
    FinSeq cycle = parse_finseq(c);
    c.expect_end();
    try {
      return Schedule::custom(n, to_idx(prefix), to_idx(cycle));
    } catch (const std::invalid_argument& e) {
      c.fail(e.what());
    }
  }
  c.fail("unknown schedule '" + kind + "'");
}

struct LoadedFamily {
  std::vector<std::string> names;
  std::vector<Sigma02Set> members;
  std::string schedule = "rr";

  bool all_truths() const {
    return std::all_of(members.begin(), members.end(), [](const auto& m) { return m.ground_truth.has_value(); });
  }
};

inline LoadedFamily load_family(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  LoadedFamily fam;
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    fs::path path(p);
    if (fs::is_directory(path)) {
      std::vector<fs::path> inside;
      for (const auto& e : fs::directory_iterator(path))
        if (e.path().extension() == ".map") inside.push_back(e.path());
      std::sort(inside.begin(), inside.end());
      files.insert(files.end(), inside.begin(), inside.end());
      if (fs::exists(path / "schedule")) {
        auto lines = content_lines(read_file((path / "schedule").string()));
        if (lines.size() != 1) throw ParseError("schedule file needs exactly one line", 1, 1);
        fam.schedule = lines[0].second;
      }
    } else {
      files.push_back(path);
    }
  }
  if (files.empty()) throw std::invalid_argument("family without members");
  for (const auto& f : files) {
    auto m = load_seqmap(f.string());
    fam.names.push_back(f.stem().string());
    fam.members.push_back({m.map, m.ground_truth, nullptr});
  }
  return fam;
}

inline std::vector<Point> parse_points(const std::string& text) {
  std::vector<Point> out;
  for (const auto& [no, line] : content_lines(text)) out.push_back(parse_whole<Point>(line, [](Cursor& c) { return parse_point(c); }, no));
  return out;
}

inline std::vector<Point> load_points(const std::string& path) { return parse_points(read_file(path)); }

}  // namespace baire
