#include "dartwin/render.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace dartwin {

// ---------------------------------------------------------------------------
// Style files
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_hex_color(std::string_view s) {
  return s.size() == 7 && s[0] == '#' &&
         std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

}  // namespace

Style parse_style(std::string_view text, std::string_view origin) {
  Style style;
  std::map<std::string_view, std::string*> colors{
      {"unchanged_color", &style.unchanged_color},
      {"highlight_color", &style.highlight_color},
      {"background_color", &style.background_color},
  };
  std::map<std::string_view, double*> numbers{
      {"stroke_width", &style.stroke_width},   {"font_size", &style.font_size},
      {"title_font_size", &style.title_font_size}, {"min_font_size", &style.min_font_size},
      {"padding", &style.padding},             {"gap", &style.gap},
      {"port_size", &style.port_size},         {"max_box_width", &style.max_box_width},
      {"corner_radius", &style.corner_radius},
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos && hash == line.find_first_not_of(" \t")) {
      continue;
    }
    line = trim(line);
    if (line.empty()) continue;

    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::malformed_input, std::string(origin) + ":" + std::to_string(line_no) + ": " + why);
    };
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));

    if (auto it = colors.find(key); it != colors.end()) {
      if (!is_hex_color(value)) fail("'" + std::string(value) + "' is not a #RRGGBB colour");
      *it->second = std::string(value);
    } else if (auto num = numbers.find(key); num != numbers.end()) {
      double parsed = 0;
      const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
      if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(parsed) || parsed < 0) {
        fail("'" + std::string(value) + "' is not a non-negative number");
      }
      *num->second = parsed;
    } else if (key == "dash") {
      style.dash = std::string(value);
    } else if (key == "font_family") {
      style.font_family = std::string(value);
    } else {
      fail("unknown style key '" + std::string(key) + "'");
    }
  }
  if (style.min_font_size <= 0 || style.min_font_size > style.font_size) {
    throw Error(ErrorCode::malformed_input, std::string(origin) + ": min_font_size must be in (0, font_size]");
  }
  return style;
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::unchanged:
      return "unchanged";
    case Status::added:
      return "added";
    case Status::removed:
      return "removed";
  }
  return "unchanged";
}

std::string_view to_string(Direction direction) {
  switch (direction) {
    case Direction::up:
      return "up";
    case Direction::down:
      return "down";
    case Direction::left:
      return "left";
    case Direction::right:
      return "right";
  }
  return "down";
}

std::string_view to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::flow:
      return "flow";
    case EdgeKind::allocation:
      return "allocation";
    case EdgeKind::conflict:
      return "conflict";
  }
  return "flow";
}

// ---------------------------------------------------------------------------
// Layout
// ---------------------------------------------------------------------------

namespace {

constexpr double kCharWidth = 0.6;   // average glyph advance, in ems
constexpr double kLineHeight = 1.3;  // in ems
constexpr double kLaneStep = 8;
constexpr double kMinGoalWidth = 100;
constexpr double kMinTwinWidth = 100;
constexpr double kMinTwinHeight = 56;

std::size_t code_points(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

double text_width(std::string_view s, double font) { return static_cast<double>(code_points(s)) * kCharWidth * font; }

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

/// Largest font <= `font` at which every text fits `avail`.
double fit_font(const std::vector<std::string>& texts, double font, double avail, const Style& style) {
  double need = 0;
  const std::string* widest = nullptr;
  for (const auto& t : texts) {
    if (text_width(t, font) > need) {
      need = text_width(t, font);
      widest = &t;
    }
  }
  if (need <= avail) return font;
  const double scaled = std::floor(font * avail / need * 10) / 10;
  if (scaled < style.min_font_size) {
    std::ostringstream msg;
    msg << "label '" << *widest << "' needs " << std::ceil(text_width(*widest, style.min_font_size))
        << "px at the minimum font size, but boxes are limited to " << style.max_box_width << "px";
    throw Error(ErrorCode::layout_overflow, msg.str());
  }
  return scaled;
}

std::vector<std::string> wrap(const std::vector<std::string>& words, double font, double avail) {
  std::vector<std::string> lines;
  std::string line;
  for (const auto& w : words) {
    const std::string candidate = line.empty() ? w : line + " " + w;
    if (!line.empty() && text_width(candidate, font) > avail) {
      lines.push_back(line);
      line = w;
    } else {
      line = candidate;
    }
  }
  if (!line.empty()) lines.push_back(line);
  return lines;
}

std::string keyword_of(ElementKind kind) {
  switch (kind) {
    case ElementKind::DarTwin:
      return "dartwin";
    case ElementKind::DartwinCore:
      return "dartwin_core";
    case ElementKind::DartwinBefore:
      return "dartwin_before";
    case ElementKind::DartwinAfter:
      return "dartwin_after";
    case ElementKind::DarTrans:
      return "dartrans";
    default:
      return std::string(to_string(kind));
  }
}

enum class Side { top, bottom, left, right };

struct PortInfo {
  EffectivePath path;
  EffectivePath owner;
  std::string name;
  bool actual_twin = false;  // sits on the system boundary
  Side side = Side::bottom;
  std::size_t slot = 0;
  std::size_t slots = 1;
};

struct Wire {
  EffectivePath path;
  EffectivePath source;
  EffectivePath target;
};

struct Link {
  EffectivePath path;
  EffectivePath goal;
  EffectivePath target;
};

struct Scan {
  std::vector<std::pair<EffectivePath, const EffectiveElement*>> goals;
  std::optional<std::pair<EffectivePath, const EffectiveElement*>> system;
  std::vector<std::pair<EffectivePath, const EffectiveElement*>> twins;
  std::vector<PortInfo> ports;
  std::vector<Wire> wires;
  std::vector<Link> allocations;
  std::vector<std::pair<Wire, std::optional<std::string>>> conflicts;
};

bool is_twin(ElementKind k) { return k == ElementKind::DigitalTwin || k == ElementKind::Arbiter; }

Scan scan(const EffectiveModel& model) {
  Scan s;
  auto add_twin = [&](const EffectivePath& path, const EffectiveElement& e) {
    s.twins.emplace_back(path, &e);
    for (const EffectiveElement& m : e.members) {
      if (m.kind == ElementKind::Port) s.ports.push_back({join_path(path, m.name), path, m.name, false});
    }
  };
  for (const EffectiveElement& m : model.root.members) {
    const EffectivePath path = m.name;
    if (m.kind == ElementKind::TwinSystem) {
      if (!s.system) s.system.emplace(path, &m);
      for (const EffectiveElement& inner : m.members) {
        if (is_twin(inner.kind)) add_twin(join_path(path, inner.name), inner);
      }
    } else if (is_twin(m.kind)) {
      add_twin(path, m);
    } else if (m.kind == ElementKind::Part && !m.is_definition) {
      for (const EffectiveElement& port : m.members) {
        if (port.kind == ElementKind::Port) {
          s.ports.push_back({join_path(path, port.name), "", port.name, true});
        }
      }
    } else if (m.kind == ElementKind::Port) {
      s.ports.push_back({path, "", m.name, true});
    }
  }

  std::function<void(const EffectiveElement&, const EffectivePath&)> walk = [&](const EffectiveElement& e,
                                                                                const EffectivePath& prefix) {
    for (const EffectiveElement& m : e.members) {
      const EffectivePath path = join_path(prefix, m.name);
      if (m.kind == ElementKind::Goal) s.goals.emplace_back(path, &m);
      if (m.kind == ElementKind::Connection && m.connect) s.wires.push_back({path, m.connect->first, m.connect->second});
      if (m.kind == ElementKind::Conflict && m.connect) {
        s.conflicts.push_back({{path, m.connect->first, m.connect->second}, m.conflict_explanation});
      }
      if (m.kind == ElementKind::Allocation && m.allocate) {
        s.allocations.push_back({path, m.allocate->first, m.allocate->second});
      }
      walk(m, path);
    }
  };
  walk(model.root, "");
  return s;
}

Marking marking_of(const ChangeSet* changes, const EffectivePath& path) {
  if (changes == nullptr) return {};
  const bool added = changes->added.count(path) > 0;
  const bool removed = changes->removed.count(path) > 0;
  if (added) return {Status::added, removed};
  if (removed) return {Status::removed, false};
  return {};
}

Direction outward(Side side) {
  switch (side) {
    case Side::top:
      return Direction::up;
    case Side::bottom:
      return Direction::down;
    case Side::left:
      return Direction::left;
    case Side::right:
      return Direction::right;
  }
  return Direction::down;
}

Direction heading(Point from, Point to) {
  if (std::abs(to.x - from.x) >= std::abs(to.y - from.y)) return to.x >= from.x ? Direction::right : Direction::left;
  return to.y >= from.y ? Direction::down : Direction::up;
}

std::vector<Point> dedupe(std::vector<Point> pts) {
  std::vector<Point> out;
  for (const Point& p : pts) {
    if (out.empty() || out.back().x != p.x || out.back().y != p.y) out.push_back(p);
  }
  return out;
}

}  // namespace

Diagram layout(const EffectiveModel& effective, const ChangeSet* changes, const Style& style) {
  const double P = style.padding;
  const double G = style.gap;
  const double font = style.font_size;
  const double avail = style.max_box_width - 2 * P;
  const Scan s = scan(effective);

  Diagram d;
  d.frame.keyword = keyword_of(effective.root.kind);
  d.frame.label = effective.root.name;

  std::map<EffectivePath, std::size_t> port_index;
  for (std::size_t i = 0; i < s.ports.size(); ++i) port_index.emplace(s.ports[i].path, i);
  std::map<EffectivePath, std::size_t> twin_index;
  for (std::size_t i = 0; i < s.twins.size(); ++i) twin_index.emplace(s.twins[i].first, i);

  // Flows between drawn ports only.
  std::vector<Wire> flows;
  for (const Wire& w : s.wires) {
    if (port_index.count(w.source) && port_index.count(w.target) && w.source != w.target) flows.push_back(w);
  }

  // Port sides.
  std::vector<PortInfo> ports = s.ports;
  for (PortInfo& p : ports) {
    if (p.actual_twin) continue;
    const auto& twin = *s.twins[twin_index.at(p.owner)].second;
    if (twin.kind == ElementKind::Arbiter) {
      p.side = p.name.rfind("in", 0) == 0 ? Side::top : Side::bottom;
      continue;
    }
    for (const Wire& w : flows) {
      const EffectivePath* peer = w.source == p.path ? &w.target : w.target == p.path ? &w.source : nullptr;
      if (peer == nullptr) continue;
      const PortInfo& other = ports[port_index.at(*peer)];
      if (!other.actual_twin && other.owner != p.owner) {
        p.side = twin_index.at(other.owner) > twin_index.at(p.owner) ? Side::right : Side::left;
      }
      break;
    }
  }
  std::map<std::pair<EffectivePath, Side>, std::vector<std::size_t>> by_side;
  for (std::size_t i = 0; i < ports.size(); ++i) by_side[{ports[i].owner, ports[i].side}].push_back(i);
  for (auto& [key, list] : by_side) {
    for (std::size_t k = 0; k < list.size(); ++k) {
      ports[list[k]].slot = k;
      ports[list[k]].slots = list.size();
    }
  }
  auto count_on = [&](const EffectivePath& owner, Side side) {
    auto it = by_side.find({owner, side});
    return it == by_side.end() ? std::size_t{0} : it->second.size();
  };
  auto widest_label = [&](const EffectivePath& owner, Side side) {
    double w = 0;
    if (auto it = by_side.find({owner, side}); it != by_side.end()) {
      for (std::size_t i : it->second) w = std::max(w, text_width(ports[i].name, font));
    }
    return w;
  };

  // Header and goals row.
  const double header = style.title_font_size + 2 * P;
  const double conflict_band = s.conflicts.empty() ? 0 : std::max(G, kLaneStep * double(s.conflicts.size() + 1) + font);
  const double goals_top = header + conflict_band + P;
  double x = 2 * P;
  double goals_bottom = goals_top;
  for (const auto& [path, goal] : s.goals) {
    GoalBox box;
    box.path = path;
    box.title = goal->name;
    const std::vector<std::string> words = goal->doc ? words_of(*goal->doc) : std::vector<std::string>{};
    std::vector<std::string> texts = words;
    texts.push_back(box.title);
    box.font_size = fit_font(texts, font, avail, style);
    box.doc_lines = wrap(words, box.font_size, avail);
    double inner = text_width(box.title, box.font_size);
    for (const auto& line : box.doc_lines) inner = std::max(inner, text_width(line, box.font_size));
    const double width = std::min(style.max_box_width, std::max(kMinGoalWidth, std::ceil(inner + 2 * P)));
    const double height = std::ceil(2 * P + box.font_size * kLineHeight * double(1 + box.doc_lines.size()));
    box.rect = {x, goals_top, width, height};
    box.marking = marking_of(changes, path);
    goals_bottom = std::max(goals_bottom, box.rect.bottom());
    x += width + G;
    d.goals.push_back(std::move(box));
  }
  const double goals_right = d.goals.empty() ? 0 : d.goals.back().rect.right();

  std::map<EffectivePath, std::size_t> goal_index;
  for (std::size_t i = 0; i < d.goals.size(); ++i) goal_index.emplace(d.goals[i].path, i);

  std::vector<Link> links;
  for (const Link& l : s.allocations) {
    const bool to_system = s.system && l.target == s.system->first;
    if (goal_index.count(l.goal) && (twin_index.count(l.target) || to_system)) links.push_back(l);
  }
  const double alloc_band = std::max(G, kLaneStep * double(links.size() + 1));
  d.separator_y = goals_bottom + alloc_band;

  // System box and the twin row.
  const double system_top = d.separator_y + G;
  const double system_x = 2 * P;
  std::string system_label;
  if (s.system) system_label = "twinsystem " + s.system->second->name;
  const double twins_top = system_top + 2 * P + style.title_font_size;
  x = system_x + P;
  double twins_bottom = twins_top;
  for (const auto& [path, twin] : s.twins) {
    TwinBox box;
    box.path = path;
    box.label = twin->name;
    box.arbiter = twin->kind == ElementKind::Arbiter;
    box.font_size = fit_font({box.label}, font, avail, style);
    const double slot = [&] {
      double w = 0;
      for (Side side : {Side::top, Side::bottom}) w = std::max(w, widest_label(path, side));
      return style.port_size + w + P;
    }();
    const std::size_t horizontal = std::max(count_on(path, Side::top), count_on(path, Side::bottom));
    const std::size_t vertical = std::max(count_on(path, Side::left), count_on(path, Side::right));
    const double side_labels = widest_label(path, Side::left) + widest_label(path, Side::right);
    const double width = std::ceil(std::max({kMinTwinWidth, text_width(box.label, box.font_size) + 2 * P,
                                             double(horizontal) * slot + P,
                                             text_width(box.label, box.font_size) + side_labels + 4 * P}));
    const double height = std::ceil(std::max(kMinTwinHeight, 2 * P + box.font_size * kLineHeight +
                                                                 double(vertical) * style.port_size * 2.5));
    box.rect = {x, twins_top, width, height};
    box.marking = marking_of(changes, path);
    twins_bottom = std::max(twins_bottom, box.rect.bottom());
    x += width + G;
    d.twins.push_back(std::move(box));
  }
  const double twins_right = d.twins.empty() ? system_x : d.twins.back().rect.right();

  std::vector<std::size_t> lane_flows;  // flows routed through the band below the twins
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Side a = ports[port_index.at(flows[i].source)].side;
    const Side b = ports[port_index.at(flows[i].target)].side;
    const bool sideways = (a == Side::left || a == Side::right) && (b == Side::left || b == Side::right);
    if (!sideways) lane_flows.push_back(i);
  }
  const double label_zone = style.port_size / 2 + font + 4;
  const double flow_band = label_zone + kLaneStep * double(lane_flows.size() + 1);
  const double system_bottom = std::max(twins_bottom + std::max(G, flow_band), system_top + 2 * P + style.title_font_size);

  double at_width = 0;
  for (const PortInfo& p : ports) {
    if (p.actual_twin) at_width += style.port_size + text_width(p.name, font) + P;
  }
  const double system_width = std::ceil(std::max({twins_right - system_x + P, at_width + 2 * P,
                                                  text_width(system_label, style.title_font_size) + 2 * P, 160.0}));
  d.system_area = {system_x, system_top, system_width, system_bottom - system_top};
  if (s.system) {
    d.system = SystemBox{s.system->first, system_label, d.system_area, marking_of(changes, s.system->first)};
  }

  // Port glyphs.
  std::map<EffectivePath, Rect> owner_rect;
  for (const TwinBox& t : d.twins) owner_rect.emplace(t.path, t.rect);
  double at_x = system_x + P;
  for (const PortInfo& p : ports) {
    Point c;
    if (p.actual_twin) {
      c = {at_x + style.port_size / 2, system_bottom};
      at_x += style.port_size + text_width(p.name, font) + P;
    } else {
      const Rect& r = owner_rect.at(p.owner);
      const double f = double(p.slot + 1) / double(p.slots + 1);
      switch (p.side) {
        case Side::top:
          c = {r.x + r.width * f, r.y};
          break;
        case Side::bottom:
          c = {r.x + r.width * f, r.bottom()};
          break;
        case Side::left:
          c = {r.x, r.y + r.height * f};
          break;
        case Side::right:
          c = {r.right(), r.y + r.height * f};
          break;
      }
    }
    if (p.side == Side::left || p.side == Side::right) {
      c.y = std::round(c.y * 2) / 2;
    } else {
      c.x = std::round(c.x * 2) / 2;
    }
    PortGlyph g;
    g.path = p.path;
    g.owner = p.actual_twin ? (s.system ? s.system->first : EffectivePath()) : p.owner;
    g.side = outward(p.side);
    g.square = {c.x - style.port_size / 2, c.y - style.port_size / 2, style.port_size, style.port_size};
    g.arrow = p.actual_twin ? Direction::down : outward(p.side);
    g.label = p.name;
    g.marking = marking_of(changes, p.path);
    d.ports.push_back(std::move(g));
  }

  // Flow edges.
  std::vector<bool> has_arrow(ports.size(), false);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const Wire& w = flows[i];
    const std::size_t a = port_index.at(w.source);
    const std::size_t b = port_index.at(w.target);
    const Point p1 = d.ports[a].square.center();
    const Point p2 = d.ports[b].square.center();
    std::vector<Point> pts;
    const auto lane = std::find(lane_flows.begin(), lane_flows.end(), i);
    if (lane == lane_flows.end()) {
      const double xm = std::round((p1.x + p2.x) / 2);
      pts = {p1, {xm, p1.y}, {xm, p2.y}, p2};
    } else {
      const double ym = twins_bottom + label_zone + kLaneStep * double(lane - lane_flows.begin() + 1);
      pts = {p1, {p1.x, ym}, {p2.x, ym}, p2};
    }
    pts = dedupe(std::move(pts));
    if (!has_arrow[a] && pts.size() >= 2) {
      d.ports[a].arrow = heading(pts[0], pts[1]);
      has_arrow[a] = true;
    }
    if (!has_arrow[b] && pts.size() >= 2) {
      d.ports[b].arrow = heading(pts[pts.size() - 2], pts.back());
      has_arrow[b] = true;
    }
    d.edges.push_back({EdgeKind::flow, w.path, w.source, w.target, std::move(pts), std::nullopt,
                       marking_of(changes, w.path)});
  }

  // Allocation edges, DT top to goal bottom.
  std::map<EffectivePath, std::vector<std::size_t>> leaving;
  std::map<EffectivePath, std::vector<std::size_t>> arriving;
  for (std::size_t i = 0; i < links.size(); ++i) {
    leaving[links[i].target].push_back(i);
    arriving[links[i].goal].push_back(i);
  }
  auto share = [](const std::vector<std::size_t>& list, std::size_t i) {
    const auto pos = std::find(list.begin(), list.end(), i) - list.begin();
    return double(pos + 1) / double(list.size() + 1);
  };
  for (std::size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    const Rect from = twin_index.count(l.target) ? owner_rect.at(l.target) : d.system_area;
    const Rect& to = d.goals[goal_index.at(l.goal)].rect;
    const double x1 = std::round(from.x + from.width * share(leaving[l.target], i));
    const double x2 = std::round(to.x + to.width * share(arriving[l.goal], i));
    const double ym = goals_bottom + alloc_band * double(i + 1) / double(links.size() + 1);
    d.edges.push_back({EdgeKind::allocation, l.path, l.target, l.goal,
                       dedupe({{x1, from.y}, {x1, ym}, {x2, ym}, {x2, to.bottom()}}), std::nullopt,
                       marking_of(changes, l.path)});
  }

  // Conflicts above the goals row.
  std::size_t lane_no = 0;
  for (const auto& [w, explanation] : s.conflicts) {
    if (!goal_index.count(w.source) || !goal_index.count(w.target)) continue;
    const Rect& a = d.goals[goal_index.at(w.source)].rect;
    const Rect& b = d.goals[goal_index.at(w.target)].rect;
    const double ym = goals_top - P - kLaneStep * double(++lane_no);
    const double xa = std::round(a.center().x);
    const double xb = std::round(b.center().x);
    d.edges.push_back({EdgeKind::conflict, w.path, w.source, w.target, dedupe({{xa, a.y}, {xa, ym}, {xb, ym}, {xb, b.y}}),
                       explanation, marking_of(changes, w.path)});
  }

  const double has_at = at_width > 0 ? style.port_size / 2 + font + 4 : 0;
  const double width = std::max({goals_right, system_x + system_width,
                                  2 * P + text_width(d.frame.keyword + " " + d.frame.label, style.title_font_size)}) +
                       2 * P;
  const double height = system_bottom + has_at + 2 * P;
  d.frame.rect = {P, P, std::ceil(width - P), std::ceil(height - P)};
  return d;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
  double r = std::round(v * 100) / 100;
  if (r == 0) r = 0;
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("0");
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      case '\'':
        out += "&apos;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

class SvgWriter {
 public:
  explicit SvgWriter(const Style& style) : style_(style) {}

  std::string color(const Marking& m) const {
    return m.status == Status::unchanged ? style_.unchanged_color : style_.highlight_color;
  }

  std::string stroke(const Marking& m) const {
    std::string out = " stroke=\"" + color(m) + "\" stroke-width=\"" + num(style_.stroke_width) + "\"";
    if (m.status == Status::removed) out += " stroke-dasharray=\"" + style_.dash + "\"";
    return out;
  }

  std::string halo_stroke() const {
    return " stroke=\"" + style_.highlight_color + "\" stroke-width=\"" + num(style_.stroke_width) +
           "\" stroke-dasharray=\"" + style_.dash + "\"";
  }

  void rect(std::string_view cls, const EffectivePath& path, const Rect& r, const Marking& m, double radius = 0) {
    if (m.modified) {
      out_ << "<rect class=\"halo\" data-path=\"" << escape(path) << "\" x=\"" << num(r.x - 4) << "\" y=\""
           << num(r.y - 4) << "\" width=\"" << num(r.width + 8) << "\" height=\"" << num(r.height + 8) << "\"";
      if (radius > 0) out_ << " rx=\"" << num(radius + 4) << "\" ry=\"" << num(radius + 4) << "\"";
      out_ << " fill=\"none\"" << halo_stroke() << "/>\n";
    }
    out_ << "<rect class=\"" << cls << "\" data-path=\"" << escape(path) << "\" x=\"" << num(r.x) << "\" y=\""
         << num(r.y) << "\" width=\"" << num(r.width) << "\" height=\"" << num(r.height) << "\"";
    if (radius > 0) out_ << " rx=\"" << num(radius) << "\" ry=\"" << num(radius) << "\"";
    out_ << " fill=\"" << style_.background_color << "\"" << stroke(m) << "/>\n";
  }

  void polyline(std::string_view cls, const EffectivePath& path, const std::vector<Point>& pts, const Marking& m) {
    std::string points;
    for (const Point& p : pts) points += (points.empty() ? "" : " ") + num(p.x) + "," + num(p.y);
    if (m.modified) {
      out_ << "<polyline class=\"halo\" data-path=\"" << escape(path) << "\" points=\"" << points
           << "\" fill=\"none\"" << halo_stroke() << " stroke-opacity=\"0.5\" transform=\"translate(3,3)\"/>\n";
    }
    out_ << "<polyline class=\"" << cls << "\" data-path=\"" << escape(path) << "\" points=\"" << points
         << "\" fill=\"none\"" << stroke(m) << "/>\n";
  }

  void arrow(const PortGlyph& g) {
    const Point c = g.square.center();
    const double h = g.square.width * 0.3;
    Point a, b, tip;
    switch (g.arrow) {
      case Direction::up:
        tip = {c.x, c.y - h}, a = {c.x - h, c.y + h}, b = {c.x + h, c.y + h};
        break;
      case Direction::down:
        tip = {c.x, c.y + h}, a = {c.x - h, c.y - h}, b = {c.x + h, c.y - h};
        break;
      case Direction::left:
        tip = {c.x - h, c.y}, a = {c.x + h, c.y - h}, b = {c.x + h, c.y + h};
        break;
      case Direction::right:
        tip = {c.x + h, c.y}, a = {c.x - h, c.y - h}, b = {c.x - h, c.y + h};
        break;
    }
    out_ << "<path class=\"port-arrow\" data-path=\"" << escape(g.path) << "\" d=\"M" << num(tip.x) << ","
         << num(tip.y) << " L" << num(a.x) << "," << num(a.y) << " L" << num(b.x) << "," << num(b.y)
         << " Z\" fill=\"" << color(g.marking) << "\" stroke=\"none\"/>\n";
  }

  void text(std::string_view cls, double x, double y, double size, std::string_view anchor, const std::string& fill,
            const std::string& body, bool bold = false) {
    out_ << "<text class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << num(size)
         << "\" text-anchor=\"" << anchor << "\" fill=\"" << fill << "\"";
    if (bold) out_ << " font-weight=\"bold\"";
    out_ << ">" << body << "</text>\n";
  }

  std::ostringstream& out() { return out_; }

 private:
  const Style& style_;
  std::ostringstream out_;
};

}  // namespace

std::string emit_svg(const Diagram& d, const Style& style) {
  SvgWriter w(style);
  auto& out = w.out();
  const double width = d.frame.rect.right() + style.padding;
  const double height = d.frame.rect.bottom() + style.padding;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\" font-family=\""
      << escape(style.font_family) << "\">\n";
  out << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"" << style.background_color << "\" stroke=\"none\"/>\n";

  w.rect("frame", "", d.frame.rect, {});
  out << "<line class=\"separator\" data-path=\"\" x1=\"" << num(d.frame.rect.x) << "\" y1=\"" << num(d.separator_y)
      << "\" x2=\"" << num(d.frame.rect.right()) << "\" y2=\"" << num(d.separator_y) << "\"" << w.stroke({})
      << "/>\n";
  if (d.system) w.rect("system", d.system->path, d.system->rect, d.system->marking);
  for (const TwinBox& t : d.twins) w.rect(t.arbiter ? "arbiter" : "dt", t.path, t.rect, t.marking);
  for (const PortGlyph& g : d.ports) {
    w.rect("port", g.path, g.square, g.marking);
    w.arrow(g);
  }
  for (const Edge& e : d.edges) w.polyline(to_string(e.kind), e.path, e.polyline, e.marking);
  for (const GoalBox& g : d.goals) w.rect("goal", g.path, g.rect, g.marking, style.corner_radius);

  const double P = style.padding;
  const std::string ink = style.unchanged_color;
  w.text("frame-label", d.frame.rect.x + P, d.frame.rect.y + P + style.title_font_size, style.title_font_size,
         "start", ink,
         "<tspan font-weight=\"bold\">" + escape(d.frame.keyword) + "</tspan> " + escape(d.frame.label));
  if (d.system) {
    w.text("system-label", d.system->rect.x + P, d.system->rect.y + P + style.title_font_size, style.title_font_size,
           "start", w.color(d.system->marking), escape(d.system->label));
  }
  for (const TwinBox& t : d.twins) {
    w.text("dt-label", t.rect.center().x, t.rect.y + P + t.font_size, t.font_size, "middle", w.color(t.marking),
           escape(t.label));
  }
  for (const PortGlyph& g : d.ports) {
    if (!g.label) continue;
    const Point c = g.square.center();
    const double half = g.square.width / 2;
    const double size = style.font_size * 0.85;
    std::string_view anchor = "start";
    double x = c.x + half + 2;
    double y = c.y + half + size;
    switch (g.side) {
      case Direction::up:
        y = c.y - half - 2;
        break;
      case Direction::down:
        break;
      case Direction::left:
        x = c.x + half + 3;
        y = c.y + size / 3;
        break;
      case Direction::right:
        x = c.x - half - 3;
        y = c.y + size / 3;
        anchor = "end";
        break;
    }
    w.text("port-label", x, y, size, anchor, w.color(g.marking), escape(*g.label));
  }
  for (const Edge& e : d.edges) {
    if (!e.label || e.polyline.size() < 2) continue;
    const Point& a = e.polyline[e.polyline.size() / 2 - (e.polyline.size() % 2 == 0 ? 1 : 0)];
    const Point& b = e.polyline[e.polyline.size() / 2];
    w.text("edge-label", (a.x + b.x) / 2, (a.y + b.y) / 2 - 4, style.font_size * 0.85, "middle", w.color(e.marking),
           escape(*e.label));
  }
  for (const GoalBox& g : d.goals) {
    const std::string fill = w.color(g.marking);
    double y = g.rect.y + P + g.font_size;
    w.text("goal-title", g.rect.center().x, y, g.font_size, "middle", fill, escape(g.title), true);
    for (const auto& line : g.doc_lines) {
      y += g.font_size * kLineHeight;
      w.text("goal-doc", g.rect.center().x, y, g.font_size, "middle", fill, escape(line));
    }
  }
  out << "</svg>\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

namespace {

EffectiveElement merge_union(const EffectiveElement& before, const EffectiveElement& after) {
  EffectiveElement out = after;
  out.members.clear();
  for (const EffectiveElement& b : before.members) {
    if (const EffectiveElement* a = after.member(b.name)) {
      out.members.push_back(merge_union(b, *a));
    } else {
      out.members.push_back(b);
    }
  }
  for (const EffectiveElement& a : after.members) {
    if (before.member(a.name) == nullptr) out.members.push_back(a);
  }
  return out;
}

}  // namespace

std::string render_dartwin(ElementId dartwin, const SemanticModel& model, const Style& style) {
  return emit_svg(layout(flatten(dartwin, model), nullptr, style), style);
}

std::string render_dartrans(ElementId dartrans, const SemanticModel& model, const Style& style) {
  const DarTransParts parts = dartrans_parts(dartrans, model);
  const ChangeSet changes = diff(dartrans, model);
  const EffectiveModel core = flatten(parts.core, model);
  const EffectiveModel before = parts.before ? flatten(*parts.before, model) : core;
  const EffectiveModel after = parts.after ? flatten(*parts.after, model) : core;

  EffectiveModel merged;
  merged.root = merge_union(before.root, after.root);
  Diagram d = layout(merged, &changes, style);
  const Element& pattern = model.element(dartrans);
  d.frame.keyword = "dartrans";
  d.frame.label = pattern.name.value_or("");
  const Element& core_element = model.element(parts.core);
  if (!core_element.specializes.empty()) {
    d.frame.label += " :> " + model.element(core_element.specializes.front()).name.value_or("");
  }
  const double needed = 4 * style.padding +
                        text_width(d.frame.keyword + " " + d.frame.label, style.title_font_size);
  d.frame.rect.width = std::max(d.frame.rect.width, std::ceil(needed));
  return emit_svg(d, style);
}

}  // namespace dartwin
