#pragma once

// JSON mappings shared by the trial log, the wire protocol and config files.
// Objects keep insertion order so that serialized lines are stable.

#include <json.hpp>

#include "mirroreyes/attention.hpp"
#include "mirroreyes/compositor.hpp"
#include "mirroreyes/geometry.hpp"
#include "mirroreyes/protocol.hpp"

namespace mirroreyes {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const Vec2& v);
void from_json(const Json& j, Vec2& v);

void to_json(Json& j, const CameraIntrinsics& c);
void from_json(const Json& j, CameraIntrinsics& c);

void to_json(Json& j, const EyeViewport& v);
void from_json(const Json& j, EyeViewport& v);

void to_json(Json& j, const MirrorPlacement& m);
void from_json(const Json& j, MirrorPlacement& m);

void to_json(Json& j, const PupilPlacement& p);
void from_json(const Json& j, PupilPlacement& p);

void to_json(Json& j, const Rgba& c);
void from_json(const Json& j, Rgba& c);

void to_json(Json& j, const EyeRender& e);
void from_json(const Json& j, EyeRender& e);

void to_json(Json& j, const RenderSpec& s);
void from_json(const Json& j, RenderSpec& s);

void to_json(Json& j, const StyleConfig& s);
void from_json(const Json& j, StyleConfig& s);

void to_json(Json& j, const TargetSelection& s);
void from_json(const Json& j, TargetSelection& s);

void to_json(Json& j, const BalancingAction& b);
void from_json(const Json& j, BalancingAction& b);

void to_json(Json& j, const PlanConfig& p);
void from_json(const Json& j, PlanConfig& p);

void to_json(Json& j, const EngineConfig& e);
void from_json(const Json& j, EngineConfig& e);

void to_json(Json& j, const LogRecord& r);
void from_json(const Json& j, LogRecord& r);

/// Compact single-line form used for log lines and wire messages.
std::string dump_line(const Json& j);

}  // namespace mirroreyes
