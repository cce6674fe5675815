#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace movt {

// Incremental SHA-256. Used for content hashes embedded in reports and for
// the config fingerprint stored in checkpoints.
class Sha256 {
  public:
    Sha256();
    void update(const void* data, std::size_t len);
    // Finalizes and returns the lowercase hex digest. The object must not be
    // updated afterwards.
    std::string hex_digest();

    static std::string of_bytes(const void* data, std::size_t len);
    static std::string of_string(const std::string& s);
    static std::string of_file(const std::string& path);

  private:
    void process_block(const std::uint8_t* block);

    std::uint32_t h_[8];
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
    std::uint64_t total_len_ = 0;
    bool finalized_ = false;
};

}  // namespace movt
