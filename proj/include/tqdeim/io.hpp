#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "tqdeim/datagen.hpp"
#include "tqdeim/interp.hpp"
#include "tqdeim/tensor.hpp"

namespace tqdeim {

// .t3b layout: "T3B1", dtype byte (1 real64, 2 complex128), three zero bytes,
// dims m, l, q as little-endian u64, then the payload in memory order
// (slice-major, row-major within a slice), little-endian IEEE-754.
inline constexpr std::size_t kT3bHeaderSize = 32;
inline constexpr std::uint8_t kT3bReal = 1;
inline constexpr std::uint8_t kT3bComplex = 2;
inline constexpr int kModelFormatVersion = 1;

using AnyTensor = std::variant<Tensor3, FourierTensor3>;
using AnyModel = std::variant<TQDeimModel, QDeimModel>;

std::vector<std::uint8_t> encode_t3b(const Tensor3& a);
std::vector<std::uint8_t> encode_t3b(const FourierTensor3& a);
AnyTensor decode_t3b(std::span<const std::uint8_t> bytes);

void write_t3b(const std::filesystem::path& path, const Tensor3& a);
void write_t3b(const std::filesystem::path& path, const FourierTensor3& a);
AnyTensor read_t3b(const std::filesystem::path& path);
// Like read_t3b but rejects complex payloads.
Tensor3 read_tensor(const std::filesystem::path& path);

// Bundle: U.t3b, D.t3b, pivots.json, meta.json. Q-DEIM matrices are stored as
// depth-1 tensors.
void save_model(const std::filesystem::path& dir, const TQDeimModel& model);
void save_model(const std::filesystem::path& dir, const QDeimModel& model);
AnyModel load_model(const std::filesystem::path& dir);

enum class ReportFormat { csv, json };

std::string report_csv(const ErrorReport& report);
std::string report_json(const ErrorReport& report);
void write_report(const std::filesystem::path& path, const ErrorReport& report,
                  ReportFormat format);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string params_json(const SnapshotDataset& train, const SnapshotDataset& test);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// 17 significant digits, round-trip exact for doubles.
std::string format_double(double v);

} // namespace tqdeim
