#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hnoma::polar {

// Cyclic redundancy check over GF(2).  `polynomial` holds all degree+1
// coefficients with the x^degree term as the most significant set bit, e.g.
// 0x11021 for x^16 + x^12 + x^5 + 1.  No bit reflection, no final XOR.
struct CrcSpec {
    int bits = 0;                 // checksum length = polynomial degree
    std::uint64_t polynomial = 0; // full coefficient word, leading bit set
    std::uint64_t initial = 0;    // register value before the first bit

    // CRC-16-CCITT in the XMODEM convention: 0x1021, zero initial register.
    static CrcSpec ccitt16();

    void validate() const;
};

// Appends `spec.bits` check bits (most significant first) to the message.
std::vector<std::uint8_t> crc_encode(std::span<const std::uint8_t> message, const CrcSpec& spec);

// True when the trailing check bits match the leading message bits.
bool crc_check(std::span<const std::uint8_t> frame, const CrcSpec& spec);

// A CRC-concatenated polar code: k message bits plus the CRC occupy the
// info set, the remaining indices are frozen to zero.
struct PolarCodeSpec {
    int block_length = 0;  // n, power of two
    int message_bits = 0;  // k
    CrcSpec crc = CrcSpec::ccitt16();
    int list_size = 4;     // L

    std::vector<int> info_set;   // ascending, size k + crc.bits
    std::vector<int> frozen_set; // ascending, complement of info_set

    // Construction provenance.
    std::string construction;
    double design_snr_db = 0.0;
    long construction_trials = 0;
    std::uint64_t construction_seed = 0;

    int info_count() const { return message_bits + crc.bits; }
    void validate() const;
};

// Ranks bit channels by genie-aided Monte-Carlo simulation of the all-zero
// codeword over a binary-input AWGN channel at `design_snr_db` (Es/N0 in dB)
// and freezes the least reliable indices.  Ties in the error counts prefer
// keeping the higher index.  Requires trials >= 1000.
PolarCodeSpec construct_monte_carlo(int block_length,
                                    int info_count,
                                    double design_snr_db,
                                    long trials,
                                    std::uint64_t seed,
                                    const CrcSpec& crc = CrcSpec::ccitt16(),
                                    int list_size = 4);

// Places message+CRC bits on the info set, zeros elsewhere, and applies the
// polar transform x = u F^{(x) log2 n} in natural (non-bit-reversed) order.
std::vector<std::uint8_t> polar_encode(std::span<const std::uint8_t> info_bits,
                                       const PolarCodeSpec& spec);

// Convenience: crc_encode followed by polar_encode.
std::vector<std::uint8_t> encode_frame(std::span<const std::uint8_t> message,
                                       const PolarCodeSpec& spec);

struct DecodeResult {
    std::vector<std::uint8_t> message;   // k bits
    std::vector<std::uint8_t> decisions; // all n input-domain decisions
    bool crc_pass = false;
    double path_metric = 0.0; // metric of the selected path
};

// CRC-aided successive-cancellation list decoding.  LLR convention:
// positive means bit 0 is more likely.  A path decision against the sign of
// its decision LLR adds |LLR| to the path metric; the reported result is the
// lowest-metric CRC-passing path, or the lowest-metric path overall when no
// path passes (crc_pass = false).  list_size = 1 is exactly successive
// cancellation.
DecodeResult scl_decode(std::span<const double> channel_llrs, const PolarCodeSpec& spec);

// Packs an n-bit frame into n/m symbol indices, most significant bit first.
std::vector<int> frame_to_symbols(std::span<const std::uint8_t> frame, int bits_per_symbol);

// Inverse of frame_to_symbols.
std::vector<std::uint8_t> symbols_to_frame(std::span<const int> symbols, int bits_per_symbol);

// Writes "n=<n>" followed by the sorted frozen indices, one per line.
void save_frozen_set(const std::filesystem::path& path, const PolarCodeSpec& spec);

// Reads a frozen-set file and rebuilds a code spec (message_bits is derived
// from the set size and the CRC length).  Throws InputError on malformed,
// unsorted, duplicate, or out-of-range content.
PolarCodeSpec load_frozen_set(const std::filesystem::path& path,
                              const CrcSpec& crc = CrcSpec::ccitt16(),
                              int list_size = 4);

} // namespace hnoma::polar
