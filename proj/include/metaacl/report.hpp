#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "metaacl/harness.hpp"

namespace metaacl {

// rows from several results files under one header (headers must match)
inline CsvTable merge_results(const std::vector<CsvTable>& tables) {
  CsvTable out;
  for (const auto& t : tables) {
    if (out.header.empty())
      out.header = t.header;
    else if (out.header != t.header)
      throw std::runtime_error("merge_results: mismatched headers");
    out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
  }
  return out;
}

struct ConditionCurve {
  std::string condition;
  std::vector<std::size_t> episodes;
  std::vector<double> mean;
  std::vector<double> sem;
  std::size_t runs = 0;
};

// per-condition mean +/- SEM over seeds at every checkpoint episode
inline std::vector<ConditionCurve> condition_curves(const CsvTable& results) {
  const std::size_t c_cond = results.column("condition");
  const std::size_t c_ep = results.column("episode");
  const std::size_t c_perf = results.column("perf");
  std::map<std::string, std::map<std::size_t, std::vector<double>>> acc;
  for (const auto& row : results.rows)
    acc[row[c_cond]][static_cast<std::size_t>(parse_int(row[c_ep]))].push_back(
        parse_double(row[c_perf]));
  std::vector<ConditionCurve> out;
  for (const auto& [cond, by_ep] : acc) {
    ConditionCurve c;
    c.condition = cond;
    for (const auto& [ep, xs] : by_ep) {
      c.episodes.push_back(ep);
      c.mean.push_back(mean_of(xs));
      c.sem.push_back(xs.size() >= 2 ? standard_error(xs) : 0.0);
      c.runs = std::max(c.runs, xs.size());
    }
    out.push_back(std::move(c));
  }
  return out;
}

// fixed-width text rendering of a CSV table
inline std::string render_text_table(const CsvTable& table) {
  std::vector<std::size_t> width(table.header.size());
  for (std::size_t i = 0; i < table.header.size(); ++i)
    width[i] = table.header[i].size();
  for (const auto& row : table.rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      width[i] = std::max(width[i], row[i].size());
  std::ostringstream out;
  const auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i];
      if (i + 1 < row.size())
        out << std::string(width[i] - row[i].size() + 2, ' ');
    }
    out << '\n';
  };
  emit(table.header);
  std::vector<std::string> rule(table.header.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    rule[i] = std::string(width[i], '-');
  emit(rule);
  for (const auto& row : table.rows) emit(row);
  return out.str();
}

namespace detail {

inline std::string svg_color(std::size_t i) {
  static const char* palette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52",
                                  "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
                                  "#ccb974", "#64b5cd", "#2f4b7c"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string svg_num(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.2f", x);
  return std::string(buf, buf + n);
}

}  // namespace detail

// self-contained SVG of the mean curves with shaded SEM bands
inline std::string render_curves_svg(const std::vector<ConditionCurve>& curves,
                                     const std::string& title = {}) {
  const double width = 880, height = 540;
  const double ml = 64, mr = 170, mt = title.empty() ? 24 : 48, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;
  std::size_t max_ep = 1;
  for (const auto& c : curves)
    if (!c.episodes.empty()) max_ep = std::max(max_ep, c.episodes.back());
  const double y_max = 100.0;
  const auto sx = [&](double ep) {
    return ml + pw * ep / static_cast<double>(max_ep);
  };
  const auto sy = [&](double perf) {
    const double p = std::clamp(perf, 0.0, y_max);
    return mt + ph * (1.0 - p / y_max);
  };
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 " << width << ' '
    << height << "' font-family='sans-serif' font-size='12'>\n";
  s << "<rect width='" << width << "' height='" << height
    << "' fill='white'/>\n";
  if (!title.empty())
    s << "<text x='" << (ml + pw / 2)
      << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  // axes and grid
  for (int t = 0; t <= 5; ++t) {
    const double perf = y_max * t / 5.0;
    const double y = sy(perf);
    s << "<line x1='" << ml << "' y1='" << y << "' x2='" << (ml + pw)
      << "' y2='" << y << "' stroke='#dddddd'/>\n";
    s << "<text x='" << (ml - 8) << "' y='" << (y + 4)
      << "' text-anchor='end'>" << detail::svg_num(perf) << "</text>\n";
    const double ep = max_ep * t / 5.0;
    const double x = sx(ep);
    s << "<text x='" << x << "' y='" << (mt + ph + 18)
      << "' text-anchor='middle'>" << static_cast<std::size_t>(ep)
      << "</text>\n";
  }
  s << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
    << (mt + ph) << "' stroke='#333333'/>\n";
  s << "<line x1='" << ml << "' y1='" << (mt + ph) << "' x2='" << (ml + pw)
    << "' y2='" << (mt + ph) << "' stroke='#333333'/>\n";
  s << "<text x='" << (ml + pw / 2) << "' y='" << (height - 12)
    << "' text-anchor='middle'>episodes</text>\n";
  s << "<text x='16' y='" << (mt + ph / 2) << "' transform='rotate(-90 16 "
    << (mt + ph / 2) << ")' text-anchor='middle'>performance</text>\n";
  // bands then lines so every mean stays visible
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (c.episodes.size() < 2) continue;
    s << "<polygon fill='" << detail::svg_color(i)
      << "' fill-opacity='0.15' stroke='none' points='";
    for (std::size_t j = 0; j < c.episodes.size(); ++j)
      s << detail::svg_num(sx(static_cast<double>(c.episodes[j]))) << ','
        << detail::svg_num(sy(c.mean[j] + c.sem[j])) << ' ';
    for (std::size_t j = c.episodes.size(); j-- > 0;)
      s << detail::svg_num(sx(static_cast<double>(c.episodes[j]))) << ','
        << detail::svg_num(sy(c.mean[j] - c.sem[j])) << ' ';
    s << "'/>\n";
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    if (c.episodes.empty()) continue;
    s << "<polyline fill='none' stroke='" << detail::svg_color(i)
      << "' stroke-width='1.8' points='";
    for (std::size_t j = 0; j < c.episodes.size(); ++j)
      s << detail::svg_num(sx(static_cast<double>(c.episodes[j]))) << ','
        << detail::svg_num(sy(c.mean[j])) << ' ';
    s << "'/>\n";
    const double ly = mt + 16 + 18 * static_cast<double>(i);
    s << "<line x1='" << (ml + pw + 12) << "' y1='" << ly << "' x2='"
      << (ml + pw + 34) << "' y2='" << ly << "' stroke='"
      << detail::svg_color(i) << "' stroke-width='2'/>\n";
    s << "<text x='" << (ml + pw + 40) << "' y='" << (ly + 4) << "'>"
      << c.condition << " (n=" << c.runs << ")</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void save_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
  if (!out) throw std::runtime_error("failed while writing " + path);
}

}  // namespace metaacl
