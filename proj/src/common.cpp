#include "vcei/common.hpp"

namespace vcei {

std::string_view to_string(Direction d) {
    return d == Direction::XtoY ? "x->y" : "y->x";
}

Direction parse_direction(std::string_view text) {
    if (text == "x->y" || text == "XtoY" || text == "xy") return Direction::XtoY;
    if (text == "y->x" || text == "YtoX" || text == "yx") return Direction::YtoX;
    throw UsageError("unknown direction '" + std::string(text) + "' (expected x->y or y->x)");
}

Direction opposite(Direction d) {
    return d == Direction::XtoY ? Direction::YtoX : Direction::XtoY;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace vcei
