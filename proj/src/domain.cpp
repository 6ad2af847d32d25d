#include "tossing/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include <fmt/format.h>

#include "tossing/errors.hpp"

namespace tossing {

void BoxObject::validate() const {
  if (!(width > 0.0) || !(depth > 0.0) || !(height > 0.0) || !std::isfinite(width) ||
      !std::isfinite(depth) || !std::isfinite(height)) {
    throw InvalidInput(fmt::format("object '{}': dimensions must be positive and finite", id));
  }
  if (id.empty()) throw InvalidInput("object id must not be empty");
}

void validate_catalog(const std::vector<BoxObject>& catalog) {
  std::set<std::string> ids;
  for (const auto& object : catalog) {
    object.validate();
    if (!ids.insert(object.id).second) {
      throw InvalidInput(fmt::format("duplicate object id '{}'", object.id));
    }
  }
}

std::vector<BoxObject> default_catalog() {
  return {
      {"O1", 0.116, 0.049, 0.135, "box", true},  {"O2", 0.065, 0.030, 0.093, "box", true},
      {"O3", 0.133, 0.088, 0.120, "box", true},  {"U1", 0.094, 0.059, 0.157, "box", false},
      {"U2", 0.075, 0.043, 0.075, "box", false}, {"U3", 0.200, 0.100, 0.103, "box", false},
  };
}

std::string to_string(Side side) {
  switch (side) {
    case Side::top: return "top";
    case Side::bottom: return "bottom";
    case Side::left: return "left";
    case Side::right: return "right";
  }
  return "?";
}

std::optional<Side> side_from_string(const std::string& name) {
  for (Side side : {Side::top, Side::bottom, Side::left, Side::right}) {
    if (to_string(side) == name) return side;
  }
  return std::nullopt;
}

std::string WallSet::to_string() const {
  std::string out;
  for (Side side : {Side::top, Side::bottom, Side::left, Side::right}) {
    if (!has(side)) continue;
    if (!out.empty()) out += ',';
    out += tossing::to_string(side);
  }
  return out.empty() ? "none" : out;
}

Workspace::Workspace(int rows, int cols, double cell_pitch, double gap, WallSet walls,
                     double floor_height)
    : Workspace(rows, cols, cell_pitch, gap, walls, floor_height,
                std::vector<bool>(static_cast<std::size_t>(std::max(rows * cols, 0)), false)) {}

Workspace::Workspace(int rows, int cols, double cell_pitch, double gap, WallSet walls,
                     double floor_height, std::vector<bool> occupancy)
    : rows_(rows),
      cols_(cols),
      cell_pitch_(cell_pitch),
      gap_(gap),
      walls_(walls),
      floor_height_(floor_height),
      occupancy_(std::move(occupancy)) {
  if (rows < 1 || cols < 1) throw InvalidInput("workspace needs at least one row and column");
  if (!(cell_pitch > 0.0)) throw InvalidInput("cell_pitch must be positive");
  if (!(gap >= 0.0) || !(gap < cell_pitch)) throw InvalidInput("gap must be in [0, cell_pitch)");
  if (!std::isfinite(floor_height)) throw InvalidInput("floor_height must be finite");
  if (occupancy_.size() != static_cast<std::size_t>(rows * cols)) {
    throw InvalidInput(fmt::format("occupancy has {} entries, expected {}", occupancy_.size(),
                                   rows * cols));
  }
}

bool Workspace::occupied(int row, int col) const {
  if (!in_bounds(row, col)) throw InvalidInput(fmt::format("cell ({},{}) out of bounds", row, col));
  return occupancy_[static_cast<std::size_t>(row * cols_ + col)];
}

Workspace Workspace::with_occupied(GridCell cell, bool value) const {
  if (!in_bounds(cell.row, cell.col)) {
    throw InvalidInput(fmt::format("cell ({},{}) out of bounds", cell.row, cell.col));
  }
  Workspace copy = *this;
  copy.occupancy_[static_cast<std::size_t>(cell.row * cols_ + cell.col)] = value;
  return copy;
}

Workspace Workspace::with_walls(WallSet walls) const {
  Workspace copy = *this;
  copy.walls_ = walls;
  return copy;
}

std::vector<GridCell> Workspace::empty_cells() const {
  std::vector<GridCell> cells;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      if (!occupied(r, c)) cells.push_back({r, c});
    }
  }
  return cells;
}

bool Workspace::full() const {
  return std::all_of(occupancy_.begin(), occupancy_.end(), [](bool b) { return b; });
}

Pose2 Workspace::slot_pose(GridCell cell) const {
  return {(cell.col + 0.5) * cell_pitch_, (cell.row + 0.5) * cell_pitch_, 0.0};
}

std::optional<CPattern> CPattern::make(int n_fixed, int n_movable) {
  CPattern p{n_fixed + n_movable, n_fixed, n_movable};
  if (!p.valid()) return std::nullopt;
  return p;
}

std::optional<CPattern> CPattern::parse(const std::string& label) {
  int c = 0, f = 0, m = 0;
  char tail = 0;
  if (std::sscanf(label.c_str(), "C%dF%dM%d%c", &c, &f, &m, &tail) != 3) return std::nullopt;
  CPattern p{c, f, m};
  if (!p.valid()) return std::nullopt;
  return p;
}

bool CPattern::valid() const {
  return n_fixed >= 1 && n_fixed <= 3 && n_movable >= 0 && n_movable <= 4 &&
         n_contacts == n_fixed + n_movable && n_contacts >= 1 && n_contacts <= 5;
}

std::string CPattern::label() const {
  return fmt::format("C{}F{}M{}", n_contacts, n_fixed, n_movable);
}

namespace {

struct Neighbor {
  int dr;
  int dc;
  Side side;
};

constexpr Neighbor kNeighbors[] = {
    {-1, 0, Side::top}, {1, 0, Side::bottom}, {0, -1, Side::left}, {0, 1, Side::right}};

CPattern count_contacts(const Workspace& ws, GridCell cell) {
  int fixed = 1;  // floor
  int movable = 0;
  for (const auto& n : kNeighbors) {
    const int r = cell.row + n.dr;
    const int c = cell.col + n.dc;
    if (!ws.in_bounds(r, c)) {
      if (ws.walls().has(n.side)) ++fixed;
    } else if (ws.occupied(r, c)) {
      ++movable;
    }
  }
  return {fixed + movable, fixed, movable};
}

}  // namespace

CPattern classify_cpattern(const Workspace& ws, GridCell cell) {
  if (ws.occupied(cell)) {
    throw PreconditionViolation(
        fmt::format("slot ({},{}) is occupied; only empty slots can be classified", cell.row,
                    cell.col));
  }
  CPattern p = count_contacts(ws, cell);
  if (!p.valid()) {
    throw GeometryError(fmt::format("slot ({},{}) touches {} fixed surfaces", cell.row, cell.col,
                                    p.n_fixed));
  }
  return p;
}

std::optional<CPattern> try_classify_cpattern(const Workspace& ws, GridCell cell) {
  if (ws.occupied(cell)) return std::nullopt;
  CPattern p = count_contacts(ws, cell);
  if (!p.valid()) return std::nullopt;
  return p;
}

Slot make_slot(const Workspace& ws, GridCell cell) {
  return {cell.row, cell.col, ws.slot_pose(cell), classify_cpattern(ws, cell)};
}

std::vector<CPattern> enumerate_cpatterns() {
  std::vector<CPattern> out;
  for (int fixed = 1; fixed <= 3; ++fixed) {
    for (int movable = 0; movable <= 4; ++movable) {
      if (auto p = CPattern::make(fixed, movable)) out.push_back(*p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GridCell> placement_order(const Workspace& ws, SlotRule rule) {
  std::vector<GridCell> cells;
  cells.reserve(static_cast<std::size_t>(ws.slot_count()));
  switch (rule) {
    case SlotRule::row_major:
      for (int r = 0; r < ws.rows(); ++r)
        for (int c = 0; c < ws.cols(); ++c) cells.push_back({r, c});
      break;
    case SlotRule::column_major:
      for (int c = 0; c < ws.cols(); ++c)
        for (int r = 0; r < ws.rows(); ++r) cells.push_back({r, c});
      break;
    case SlotRule::reverse_row_major:
      for (int r = ws.rows() - 1; r >= 0; --r)
        for (int c = ws.cols() - 1; c >= 0; --c) cells.push_back({r, c});
      break;
  }
  return cells;
}

Slot select_placement_slot(const Workspace& ws, SlotRule rule) {
  for (GridCell cell : placement_order(ws, rule)) {
    if (!ws.occupied(cell)) return make_slot(ws, cell);
  }
  throw NoSlotError("workspace has no empty slot");
}

}  // namespace tossing
