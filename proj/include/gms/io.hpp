#pragma once

#include <string>

#include <json.hpp>

#include "gms/cosets.hpp"
#include "gms/measure.hpp"
#include "gms/pw_map.hpp"

namespace gms {

using Json = nlohmann::json;

// Shortest round-trip decimal form; keeps report files byte-deterministic.
std::string format_double(double v);

// Scalars serialize as plain numbers, or as {"num": .., "den": ..} when they
// carry a non-integer exact rational, so rational inputs survive a round trip.
Json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);

Json measure_to_json(const RMeasure& m);
RMeasure measure_from_json(const Json& j);

Json map_to_json(const PwMap& g);  // throws ValidationError on sampled segments
PwMap map_from_json(const Json& j);

Json label_to_json(const CanonicalLabel& label);
CanonicalLabel label_from_json(const Json& j);

Json space_description_to_json(const SpaceDescription& d);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gms
