#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dartwin/flatten.hpp"
#include "dartwin/model.hpp"

namespace dartwin {

struct Style {
  std::string unchanged_color = "#000000";
  std::string highlight_color = "#E07B00";
  std::string background_color = "#FFFFFF";
  std::string dash = "6 4";
  std::string font_family = "Helvetica, Arial, sans-serif";
  double stroke_width = 1.5;
  double font_size = 12;
  double title_font_size = 14;
  double min_font_size = 8;
  double padding = 12;
  double gap = 32;
  double port_size = 10;
  double max_box_width = 280;
  double corner_radius = 10;
};

/// `key = value` lines, `#` comments. Unknown keys and bad numbers throw
/// Error(malformed_input).
Style parse_style(std::string_view text, std::string_view origin = "<style>");

enum class Status { unchanged, added, removed };
std::string_view to_string(Status status);

enum class Direction { up, down, left, right };
std::string_view to_string(Direction direction);

enum class EdgeKind { flow, allocation, conflict };
std::string_view to_string(EdgeKind kind);

struct Point {
  double x = 0;
  double y = 0;
};

struct Rect {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  double right() const { return x + width; }
  double bottom() const { return y + height; }
  Point center() const { return {x + width / 2, y + height / 2}; }
};

struct Marking {
  Status status = Status::unchanged;
  bool modified = false;  // removed and re-added under the same path
};

struct Frame {
  std::string keyword;  // drawn bold
  std::string label;
  Rect rect;
};

struct GoalBox {
  EffectivePath path;
  Rect rect;
  std::string title;
  std::vector<std::string> doc_lines;
  double font_size = 0;
  Marking marking;
};

struct SystemBox {
  EffectivePath path;
  std::string label;
  Rect rect;
  Marking marking;
};

struct TwinBox {
  EffectivePath path;
  std::string label;
  Rect rect;
  double font_size = 0;
  bool arbiter = false;
  Marking marking;
};

struct PortGlyph {
  EffectivePath path;
  EffectivePath owner;  // DT box, or the system box for actual-twin ports
  Rect square;
  Direction side = Direction::down;   // boundary of the owner the glyph sits on
  Direction arrow = Direction::down;  // flow direction at the port
  std::optional<std::string> label;
  Marking marking;
};

struct Edge {
  EdgeKind kind = EdgeKind::flow;
  EffectivePath path;
  EffectivePath from;
  EffectivePath to;
  std::vector<Point> polyline;
  std::optional<std::string> label;
  Marking marking;
};

struct Diagram {
  Frame frame;
  double separator_y = 0;
  std::optional<SystemBox> system;
  Rect system_area;  // where system content lives, drawn or not
  std::vector<GoalBox> goals;
  std::vector<TwinBox> twins;
  std::vector<PortGlyph> ports;
  std::vector<Edge> edges;
};

/// Layered placement: goals, separator, twin system with its DTs, actual-twin
/// ports on the system's bottom edge. Throws Error(layout_overflow) when a
/// label cannot fit `max_box_width` even at `min_font_size`.
Diagram layout(const EffectiveModel& effective, const ChangeSet* changes = nullptr,
               const Style& style = {});

/// Standalone SVG 1.1. Every drawable is one stroked element carrying
/// `class` and `data-path`; text and arrowheads are fill-only.
std::string emit_svg(const Diagram& diagram, const Style& style = {});

/// Union of before and after, coloured by the change set.
std::string render_dartrans(ElementId dartrans, const SemanticModel& model, const Style& style = {});

/// Plain view of a dartwin (or core/before/after).
std::string render_dartwin(ElementId dartwin, const SemanticModel& model, const Style& style = {});

}  // namespace dartwin
