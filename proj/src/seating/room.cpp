#include "courseforge/seating/room.hpp"

#include <algorithm>
#include <set>

#include "courseforge/common/error.hpp"
#include "courseforge/common/files.hpp"

namespace courseforge::seating {

using nlohmann::json;

namespace {

constexpr std::pair<Attr, std::string_view> kAttrNames[] = {
    {kLeftHanded, "left_handed"}, {kAisle, "aisle"}, {kFront, "front"}, {kBroken, "broken"}};

[[noreturn]] void room_error(const std::string& where, const std::string& message) {
  throw user_error("room", where + ": " + message);
}

}  // namespace

Attr parse_attr(std::string_view name) {
  for (const auto& [attr, n] : kAttrNames) {
    if (n == name) return attr;
  }
  throw user_error("attr", "unknown seat attribute '" + std::string(name) + "'");
}

std::vector<std::string> attr_names(AttrSet set) {
  std::vector<std::string> out;
  for (const auto& [attr, n] : kAttrNames) {
    if (set.has(attr)) out.emplace_back(n);
  }
  return out;
}

std::size_t Room::seat_count() const {
  return static_cast<std::size_t>(std::count_if(grid.begin(), grid.end(), [](const auto& s) { return s.has_value(); }));
}

Room parse_room(std::string_view document) {
  json j = json::parse(document, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw user_error("room", "room document is not a JSON object");
  Room room;
  auto id = j.find("room_id");
  if (id == j.end() || !id->is_string() || id->get<std::string>().empty()) room_error("room_id", "missing or not a string");
  room.room_id = id->get<std::string>();
  auto rows = j.find("rows");
  if (rows == j.end() || !rows->is_array()) room_error(room.room_id, "'rows' must be an array of arrays");
  room.rows = static_cast<int>(rows->size());
  for (int r = 0; r < room.rows; ++r) {
    const json& row = (*rows)[static_cast<std::size_t>(r)];
    std::string where = room.room_id + " row " + std::to_string(r);
    if (!row.is_array()) room_error(where, "row is not an array");
    if (r == 0) room.cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != room.cols) {
      room_error(where, "ragged grid (" + std::to_string(row.size()) + " cells, expected " + std::to_string(room.cols) + ")");
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const json& cell = row[c];
      if (cell.is_null()) {
        room.grid.emplace_back(std::nullopt);
        continue;
      }
      if (!cell.is_object()) room_error(where + " col " + std::to_string(c), "cell must be a seat object or null");
      Seat seat;
      if (auto attrs = cell.find("attrs"); attrs != cell.end()) {
        if (!attrs->is_array()) room_error(where + " col " + std::to_string(c), "'attrs' must be an array");
        for (const auto& a : *attrs) {
          if (!a.is_string()) room_error(where + " col " + std::to_string(c), "attribute must be a string");
          try {
            seat.attrs.bits |= parse_attr(a.get<std::string>());
          } catch (const Error& e) {
            room_error(where + " col " + std::to_string(c), e.what());
          }
        }
      }
      room.grid.emplace_back(seat);
    }
  }
  return room;
}

Room load_room(const std::filesystem::path& path) { return parse_room(read_file(path)); }

json to_json(const Room& room) {
  json rows = json::array();
  for (int r = 0; r < room.rows; ++r) {
    json row = json::array();
    for (int c = 0; c < room.cols; ++c) {
      const auto& s = room.at(r, c);
      row.push_back(s ? json{{"attrs", attr_names(s->attrs)}} : json(nullptr));
    }
    rows.push_back(std::move(row));
  }
  return {{"room_id", room.room_id}, {"rows", std::move(rows)}};
}

std::vector<Room> load_rooms(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw user_error("io", "rooms directory '" + dir.string() + "' not found");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Room> rooms;
  std::set<std::string> ids;
  for (const auto& f : files) {
    rooms.push_back(load_room(f));
    if (!ids.insert(rooms.back().room_id).second) {
      throw user_error("room", "duplicate room_id '" + rooms.back().room_id + "' in " + f.string());
    }
  }
  if (rooms.empty()) throw user_error("room", "no room files in '" + dir.string() + "'");
  return rooms;
}

std::string seat_label(int row, int col) {
  std::string letters;
  for (int n = row + 1; n > 0; n = (n - 1) / 26) letters.insert(letters.begin(), static_cast<char>('A' + (n - 1) % 26));
  return letters + std::to_string(col + 1);
}

}  // namespace courseforge::seating
