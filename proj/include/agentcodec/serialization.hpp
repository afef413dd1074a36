#pragma once

#include "agentcodec/channel.hpp"
#include "agentcodec/routing.hpp"
#include "agentcodec/types.hpp"
#include "json.hpp"

namespace agentcodec {

void to_json(nlohmann::json& j, const AgentOutput& v);
void from_json(const nlohmann::json& j, AgentOutput& v);

void to_json(nlohmann::json& j, const ObjectiveCheck& v);
void from_json(const nlohmann::json& j, ObjectiveCheck& v);

void to_json(nlohmann::json& j, const Task& v);
void from_json(const nlohmann::json& j, Task& v);

void to_json(nlohmann::json& j, const RunRecord& v);
void from_json(const nlohmann::json& j, RunRecord& v);

void to_json(nlohmann::json& j, const TechniqueConfig& v);
void from_json(const nlohmann::json& j, TechniqueConfig& v);

void to_json(nlohmann::json& j, const QualityMap& v);
void from_json(const nlohmann::json& j, QualityMap& v);

void to_json(nlohmann::json& j, const SyntheticChannelSpec& v);
void from_json(const nlohmann::json& j, SyntheticChannelSpec& v);

void to_json(nlohmann::json& j, const ChannelConfig& v);
void from_json(const nlohmann::json& j, ChannelConfig& v);

void to_json(nlohmann::json& j, const CacheEntry& v);
void from_json(const nlohmann::json& j, CacheEntry& v);

void to_json(nlohmann::json& j, const RouterWeights& v);
void from_json(const nlohmann::json& j, RouterWeights& v);

void to_json(nlohmann::json& j, const McsProfile& v);
void from_json(const nlohmann::json& j, McsProfile& v);

/// Task files: {"tasks": [...]} or a bare array.
std::vector<Task> load_tasks(const std::string& path);

/// Router cache persists as JSON lines, one CacheEntry per line.
std::vector<CacheEntry> load_cache_entries(const std::string& path);
void save_cache_entries(const std::string& path, const std::vector<CacheEntry>& entries);

}  // namespace agentcodec
