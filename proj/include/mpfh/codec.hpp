#pragma once

/// Systematic MDS erasure code over GF(2^8).
///
/// A frame is split into k equal fragments (the last zero-padded) and
/// expanded to n blocks: blocks 0..k-1 are the fragments themselves, blocks
/// k..n-1 are parity combinations. The generator matrix is a Vandermonde
/// matrix over GF(2^8) normalized so its top k rows are the identity; every
/// k x k row subset stays invertible, so any k received blocks reconstruct
/// the frame exactly.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "mpfh/errors.hpp"
#include "mpfh/gf256.hpp"

namespace mpfh::codec {

/// (n, k) code geometry. GF(2^8) Vandermonde rows need distinct evaluation
/// points, which bounds n at 255.
struct CodeGeometry {
    int total_blocks = 1;  ///< n
    int data_blocks  = 1;  ///< k

    void validate() const {
        if (data_blocks < 1 || total_blocks < data_blocks || total_blocks > 255)
            throw DomainError("code geometry: need 1 <= k <= n <= 255");
    }
    bool operator==(const CodeGeometry&) const = default;
};

struct CodedBlock {
    uint64_t frame_id = 0;
    int block_index   = 0;  ///< in [0, n)
    CodeGeometry geometry;
    uint32_t original_length = 0;  ///< frame size in bytes, pre-padding
    std::vector<uint8_t> payload;  ///< ceil(original_length / k) bytes
};

/// Immutable encoder/decoder for one geometry; safe to share across threads
/// after construction.
class BlockCodec {
public:
    explicit BlockCodec(CodeGeometry geometry) : geometry_(geometry) {
        geometry.validate();
        build_generator();
    }

    const CodeGeometry& geometry() const { return geometry_; }

    /// Row r of the generator matrix (k coefficients). Rows 0..k-1 are the
    /// identity; rows k..n-1 are the parity coefficients.
    const uint8_t* generator_row(int r) const {
        return generator_.data() + static_cast<std::size_t>(r) * geometry_.data_blocks;
    }

    std::vector<CodedBlock> encode(const std::vector<uint8_t>& frame, uint64_t frame_id) const {
        if (frame.empty()) throw EmptyFrameError("encode: frame must be nonempty");
        const int n = geometry_.total_blocks;
        const int k = geometry_.data_blocks;
        const std::size_t block_len = (frame.size() + k - 1) / k;

        std::vector<CodedBlock> blocks(n);
        for (int i = 0; i < n; ++i) {
            blocks[i].frame_id = frame_id;
            blocks[i].block_index = i;
            blocks[i].geometry = geometry_;
            blocks[i].original_length = static_cast<uint32_t>(frame.size());
            blocks[i].payload.assign(block_len, 0);
        }
        // systematic fragments
        for (int i = 0; i < k; ++i) {
            const std::size_t off = static_cast<std::size_t>(i) * block_len;
            const std::size_t len = std::min(block_len, frame.size() - std::min(off, frame.size()));
            if (len > 0) std::memcpy(blocks[i].payload.data(), frame.data() + off, len);
        }
        // parity rows
        for (int r = k; r < n; ++r) {
            const uint8_t* row = generator_row(r);
            for (int j = 0; j < k; ++j)
                gf256::muladd_row(blocks[r].payload.data(), blocks[j].payload.data(), row[j],
                                  block_len);
        }
        return blocks;
    }

    /// Reconstruct the original frame from any >= k blocks of one frame.
    std::vector<uint8_t> decode(const std::vector<CodedBlock>& blocks) const {
        const int k = geometry_.data_blocks;
        if (static_cast<int>(blocks.size()) < k)
            throw InsufficientBlocksError("decode: got " + std::to_string(blocks.size()) +
                                          " blocks, need " + std::to_string(k));
        check_metadata(blocks);

        // Use the first k distinct block indices, in ascending index order.
        std::vector<const CodedBlock*> chosen;
        {
            std::vector<const CodedBlock*> sorted;
            sorted.reserve(blocks.size());
            for (const auto& b : blocks) sorted.push_back(&b);
            std::sort(sorted.begin(), sorted.end(),
                      [](const CodedBlock* a, const CodedBlock* b) {
                          return a->block_index < b->block_index;
                      });
            for (const CodedBlock* b : sorted)
                if (chosen.empty() || chosen.back()->block_index != b->block_index)
                    chosen.push_back(b);
            if (static_cast<int>(chosen.size()) < k)
                throw InsufficientBlocksError("decode: fewer than k distinct block indices");
            chosen.resize(k);
        }

        const std::size_t block_len = chosen[0]->payload.size();
        const uint32_t original_length = chosen[0]->original_length;

        std::vector<std::vector<uint8_t>> fragments(k);
        bool systematic = true;
        for (int i = 0; i < k; ++i) systematic = systematic && chosen[i]->block_index == i;
        if (systematic) {
            for (int i = 0; i < k; ++i) fragments[i] = chosen[i]->payload;
        } else {
            fragments = solve(chosen, block_len);
        }

        std::vector<uint8_t> frame(original_length);
        for (int i = 0; i < k; ++i) {
            const std::size_t off = static_cast<std::size_t>(i) * block_len;
            if (off >= frame.size()) break;
            const std::size_t len = std::min(block_len, frame.size() - off);
            std::memcpy(frame.data() + off, fragments[i].data(), len);
        }
        return frame;
    }

private:
    void check_metadata(const std::vector<CodedBlock>& blocks) const {
        const CodedBlock& first = blocks.front();
        for (const auto& b : blocks) {
            if (b.geometry != geometry_)
                throw MetadataMismatchError("decode: block geometry does not match codec");
            if (b.frame_id != first.frame_id)
                throw MetadataMismatchError("decode: blocks belong to different frames");
            if (b.original_length != first.original_length)
                throw MetadataMismatchError("decode: inconsistent original_length");
            if (b.payload.size() != first.payload.size())
                throw MetadataMismatchError("decode: inconsistent payload length");
            if (b.block_index < 0 || b.block_index >= geometry_.total_blocks)
                throw MetadataMismatchError("decode: block index out of range");
        }
    }

    /// Gaussian elimination over GF(2^8): invert the k x k submatrix picked
    /// by the received block indices and apply it to the payloads.
    std::vector<std::vector<uint8_t>> solve(const std::vector<const CodedBlock*>& chosen,
                                            std::size_t block_len) const {
        const int k = geometry_.data_blocks;
        std::vector<uint8_t> m(static_cast<std::size_t>(k) * k);
        std::vector<std::vector<uint8_t>> rhs(k);
        for (int i = 0; i < k; ++i) {
            std::memcpy(&m[static_cast<std::size_t>(i) * k], generator_row(chosen[i]->block_index),
                        k);
            rhs[i] = chosen[i]->payload;
        }
        for (int col = 0; col < k; ++col) {
            int pivot = -1;
            for (int r = col; r < k; ++r)
                if (m[static_cast<std::size_t>(r) * k + col] != 0) {
                    pivot = r;
                    break;
                }
            if (pivot < 0)
                throw SingularMatrixError("decode: singular submatrix (broken MDS invariant)");
            if (pivot != col) {
                for (int c = 0; c < k; ++c)
                    std::swap(m[static_cast<std::size_t>(pivot) * k + c],
                              m[static_cast<std::size_t>(col) * k + c]);
                std::swap(rhs[pivot], rhs[col]);
            }
            const uint8_t piv_inv = gf256::inv(m[static_cast<std::size_t>(col) * k + col]);
            for (int c = 0; c < k; ++c)
                m[static_cast<std::size_t>(col) * k + c] =
                    gf256::mul(m[static_cast<std::size_t>(col) * k + c], piv_inv);
            scale_row(rhs[col], piv_inv, block_len);
            for (int r = 0; r < k; ++r) {
                if (r == col) continue;
                const uint8_t factor = m[static_cast<std::size_t>(r) * k + col];
                if (factor == 0) continue;
                for (int c = 0; c < k; ++c)
                    m[static_cast<std::size_t>(r) * k + c] ^=
                        gf256::mul(factor, m[static_cast<std::size_t>(col) * k + c]);
                gf256::muladd_row(rhs[r].data(), rhs[col].data(), factor, block_len);
            }
        }
        return rhs;
    }

    static void scale_row(std::vector<uint8_t>& row, uint8_t coeff, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) row[i] = gf256::mul(row[i], coeff);
    }

    /// Vandermonde rows V[i][j] = (alpha^i)^j, normalized to a systematic
    /// form by multiplying with the inverse of the top k x k square.
    void build_generator() {
        const int n = geometry_.total_blocks;
        const int k = geometry_.data_blocks;
        std::vector<uint8_t> v(static_cast<std::size_t>(n) * k);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                v[static_cast<std::size_t>(i) * k + j] =
                    gf256::pow_alpha(static_cast<unsigned>(i) * static_cast<unsigned>(j));

        // invert the top square with Gauss-Jordan
        std::vector<uint8_t> top(static_cast<std::size_t>(k) * k);
        std::vector<uint8_t> inv_top(static_cast<std::size_t>(k) * k, 0);
        std::memcpy(top.data(), v.data(), top.size());
        for (int i = 0; i < k; ++i) inv_top[static_cast<std::size_t>(i) * k + i] = 1;
        for (int col = 0; col < k; ++col) {
            int pivot = -1;
            for (int r = col; r < k; ++r)
                if (top[static_cast<std::size_t>(r) * k + col] != 0) {
                    pivot = r;
                    break;
                }
            if (pivot < 0) throw SingularMatrixError("generator: Vandermonde top square singular");
            for (int c = 0; c < k; ++c) {
                std::swap(top[static_cast<std::size_t>(pivot) * k + c],
                          top[static_cast<std::size_t>(col) * k + c]);
                std::swap(inv_top[static_cast<std::size_t>(pivot) * k + c],
                          inv_top[static_cast<std::size_t>(col) * k + c]);
            }
            const uint8_t piv_inv = gf256::inv(top[static_cast<std::size_t>(col) * k + col]);
            for (int c = 0; c < k; ++c) {
                top[static_cast<std::size_t>(col) * k + c] =
                    gf256::mul(top[static_cast<std::size_t>(col) * k + c], piv_inv);
                inv_top[static_cast<std::size_t>(col) * k + c] =
                    gf256::mul(inv_top[static_cast<std::size_t>(col) * k + c], piv_inv);
            }
            for (int r = 0; r < k; ++r) {
                if (r == col) continue;
                const uint8_t factor = top[static_cast<std::size_t>(r) * k + col];
                if (factor == 0) continue;
                for (int c = 0; c < k; ++c) {
                    top[static_cast<std::size_t>(r) * k + c] ^=
                        gf256::mul(factor, top[static_cast<std::size_t>(col) * k + c]);
                    inv_top[static_cast<std::size_t>(r) * k + c] ^=
                        gf256::mul(factor, inv_top[static_cast<std::size_t>(col) * k + c]);
                }
            }
        }

        // G = V * inv(top): top k rows become the identity
        generator_.assign(static_cast<std::size_t>(n) * k, 0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j) {
                uint8_t acc = 0;
                for (int l = 0; l < k; ++l)
                    acc ^= gf256::mul(v[static_cast<std::size_t>(i) * k + l],
                                      inv_top[static_cast<std::size_t>(l) * k + j]);
                generator_[static_cast<std::size_t>(i) * k + j] = acc;
            }
    }

    CodeGeometry geometry_;
    std::vector<uint8_t> generator_;  // n x k, row-major
};

// -- wire format -----------------------------------------------------------
//
// frame_id (8 bytes, big-endian) | block_index (1) | n (1) | k (1) |
// original_length (4 bytes, big-endian) | payload

inline constexpr std::size_t kWireHeaderSize = 15;

inline std::vector<uint8_t> serialize_block(const CodedBlock& block) {
    std::vector<uint8_t> out;
    out.reserve(kWireHeaderSize + block.payload.size());
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(block.frame_id >> shift));
    out.push_back(static_cast<uint8_t>(block.block_index));
    out.push_back(static_cast<uint8_t>(block.geometry.total_blocks));
    out.push_back(static_cast<uint8_t>(block.geometry.data_blocks));
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(block.original_length >> shift));
    out.insert(out.end(), block.payload.begin(), block.payload.end());
    return out;
}

inline CodedBlock parse_block(const std::vector<uint8_t>& wire) {
    if (wire.size() < kWireHeaderSize)
        throw MetadataMismatchError("parse_block: truncated header");
    CodedBlock b;
    for (int i = 0; i < 8; ++i) b.frame_id = (b.frame_id << 8) | wire[i];
    b.block_index = wire[8];
    b.geometry.total_blocks = wire[9];
    b.geometry.data_blocks = wire[10];
    b.geometry.validate();
    for (int i = 11; i < 15; ++i) b.original_length = (b.original_length << 8) | wire[i];
    b.payload.assign(wire.begin() + kWireHeaderSize, wire.end());
    return b;
}

}  // namespace mpfh::codec
