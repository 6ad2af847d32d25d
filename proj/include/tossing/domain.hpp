#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tossing {

/// Rectangular object. Dimensions are in meters; width runs along the toss
/// direction when the object is upright, depth is the dimension held between
/// the gripper fingers.
struct BoxObject {
  std::string id;
  double width = 0.0;
  double depth = 0.0;
  double height = 0.0;
  std::string category = "box";
  bool trained = false;

  void validate() const;
};

/// Throws InvalidInput on duplicate ids or invalid dimensions.
void validate_catalog(const std::vector<BoxObject>& catalog);

/// The three trained objects and three unknown objects used by default.
std::vector<BoxObject> default_catalog();

enum class Side : std::uint8_t { top = 0, bottom = 1, left = 2, right = 3 };

std::string to_string(Side side);
std::optional<Side> side_from_string(const std::string& name);

/// Perimeter walls. `top` is the row-0 edge, `left` the column-0 edge.
class WallSet {
public:
  constexpr WallSet() = default;
  static constexpr WallSet from_bits(std::uint8_t bits) { return WallSet(bits & 0x0f); }
  static constexpr WallSet all() { return WallSet(0x0f); }

  constexpr bool has(Side side) const { return (bits_ >> static_cast<int>(side)) & 1u; }
  constexpr WallSet with(Side side) const {
    return WallSet(bits_ | static_cast<std::uint8_t>(1u << static_cast<int>(side)));
  }
  constexpr bool contains(WallSet other) const { return (bits_ & other.bits_) == other.bits_; }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool operator==(const WallSet&) const = default;

  std::string to_string() const;

private:
  constexpr explicit WallSet(std::uint8_t bits) : bits_(bits) {}
  std::uint8_t bits_ = 0;
};

struct GridCell {
  int row = 0;
  int col = 0;
  constexpr bool operator==(const GridCell&) const = default;
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
};

/// Gridded placement area. Slot (r, c) is centered at
/// x = (c + 0.5) * cell_pitch, y = (r + 0.5) * cell_pitch in the workspace frame.
class Workspace {
public:
  Workspace(int rows, int cols, double cell_pitch, double gap, WallSet walls = {},
            double floor_height = 0.0);
  Workspace(int rows, int cols, double cell_pitch, double gap, WallSet walls, double floor_height,
            std::vector<bool> occupancy);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_pitch() const { return cell_pitch_; }
  double gap() const { return gap_; }
  WallSet walls() const { return walls_; }
  double floor_height() const { return floor_height_; }
  int slot_count() const { return rows_ * cols_; }

  bool in_bounds(int row, int col) const {
    return row >= 0 && row < rows_ && col >= 0 && col < cols_;
  }
  bool occupied(int row, int col) const;
  bool occupied(GridCell cell) const { return occupied(cell.row, cell.col); }
  const std::vector<bool>& occupancy() const { return occupancy_; }

  Workspace with_occupied(GridCell cell, bool value = true) const;
  Workspace with_walls(WallSet walls) const;

  std::vector<GridCell> empty_cells() const;
  bool full() const;

  Pose2 slot_pose(GridCell cell) const;
  double extent_x() const { return cols_ * cell_pitch_; }
  double extent_y() const { return rows_ * cell_pitch_; }

  bool operator==(const Workspace&) const = default;

private:
  int rows_;
  int cols_;
  double cell_pitch_;
  double gap_;
  WallSet walls_;
  double floor_height_;
  std::vector<bool> occupancy_;
};

/// Contact descriptor CXFYMZ: X contacts, Y fixed, Z movable.
struct CPattern {
  int n_contacts = 1;
  int n_fixed = 1;
  int n_movable = 0;

  static std::optional<CPattern> make(int n_fixed, int n_movable);
  static std::optional<CPattern> parse(const std::string& label);

  bool valid() const;
  std::string label() const;

  // Ordered by (n_fixed, n_contacts).
  constexpr auto operator<=>(const CPattern& other) const {
    if (auto cmp = n_fixed <=> other.n_fixed; cmp != 0) return cmp;
    if (auto cmp = n_contacts <=> other.n_contacts; cmp != 0) return cmp;
    return n_movable <=> other.n_movable;
  }
  constexpr bool operator==(const CPattern&) const = default;
};

struct Slot {
  int row = 0;
  int col = 0;
  Pose2 target_pose;
  CPattern cpattern;

  GridCell cell() const { return {row, col}; }
};

/// Floor plus each abutting side: a perimeter wall counts as fixed, an
/// occupied neighbor as movable. Throws PreconditionViolation if the cell is
/// occupied and GeometryError if the result is not a valid pattern.
CPattern classify_cpattern(const Workspace& ws, GridCell cell);

/// Non-throwing variant: nullopt for occupied cells and invalid geometry.
std::optional<CPattern> try_classify_cpattern(const Workspace& ws, GridCell cell);

Slot make_slot(const Workspace& ws, GridCell cell);

/// All twelve patterns sorted by (n_fixed, n_contacts).
std::vector<CPattern> enumerate_cpatterns();

enum class SlotRule { row_major, column_major, reverse_row_major };

Slot select_placement_slot(const Workspace& ws, SlotRule rule = SlotRule::row_major);

/// Cells in the order `rule` visits them.
std::vector<GridCell> placement_order(const Workspace& ws, SlotRule rule = SlotRule::row_major);

}  // namespace tossing
