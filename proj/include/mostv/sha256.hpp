#ifndef MOSTV_SHA256_HPP_
#define MOSTV_SHA256_HPP_

#include <cstdint>
#include <string>

namespace mostv {

// Incremental SHA-256, used for the run manifest's content hashes.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, size_t len);
  std::string hex_digest();  // finalizes

  static std::string of_file(const std::string& path);
  static std::string of_string(const std::string& s);

 private:
  void process_block(const uint8_t* block);

  uint32_t state_[8];
  uint64_t bit_count_ = 0;
  uint8_t buffer_[64];
  size_t buffer_len_ = 0;
};

}  // namespace mostv

#endif  // MOSTV_SHA256_HPP_
