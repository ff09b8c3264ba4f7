"""AES-based pseudo-random functions for coins, round keys and small ciphers.

Every permutation stage owns one :class:`Prf`, keyed by SHA-256 of a label
and the stage key, so equal key material always gives the same permutation.

* ``narrow``: one AES-256 block over ``tag | level | round | 0 0 | pos`` for
  positions below 2**64.  Also available over numpy arrays.
* ``wide``: AES-CMAC over a header and the fixed-width position bytes, for
  positions that do not fit 64 bits.
* ``stream``: AES-CTR keystream, used for round keys that must be uniform
  modulo a large N.
"""

import hashlib
import struct

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.cmac import CMAC

NARROW_LIMIT = 1 << 64


def derive_key(key: bytes, label: bytes) -> bytes:
    return hashlib.sha256(label + key).digest()


class Prf:
    def __init__(self, key: bytes, label: bytes = b"cubelock-prf"):
        self.key = derive_key(key, label)
        self._aes = algorithms.AES(self.key)
        self._ecb = Cipher(self._aes, modes.ECB())

    def ecb_encrypt(self, data: bytes) -> bytes:
        enc = self._ecb.encryptor()
        return enc.update(data) + enc.finalize()

    def ecb_decrypt(self, data: bytes) -> bytes:
        dec = self._ecb.decryptor()
        return dec.update(data) + dec.finalize()

    def narrow(self, tag: int, level: int, rnd: int, pos: int) -> int:
        """64 pseudo-random bits for ``pos < 2**64``."""
        block = struct.pack(">BBIHQ", tag, level & 0xFF, rnd & 0xFFFFFFFF, 0, pos)
        return int.from_bytes(self.ecb_encrypt(block)[8:], "big")

    def narrow_batch(self, tag: int, level: int, rnd: int, pos: np.ndarray) -> np.ndarray:
        pos = np.asarray(pos, dtype=np.uint64)
        blocks = np.zeros((pos.size, 16), dtype=np.uint8)
        blocks[:, :8] = np.frombuffer(struct.pack(">BBIH", tag, level & 0xFF, rnd & 0xFFFFFFFF, 0), dtype=np.uint8)
        blocks[:, 8:] = pos.astype(">u8").view(np.uint8).reshape(-1, 8)
        out = np.frombuffer(self.ecb_encrypt(blocks.tobytes()), dtype=np.uint8).reshape(-1, 16)
        return out[:, 8:].copy().view(">u8").reshape(-1).astype(np.uint64)

    def wide(self, tag: int, level: int, rnd: int, pos: int, width_bytes: int) -> int:
        """128 pseudo-random bits for an arbitrarily large ``pos``."""
        mac = CMAC(self._aes)
        mac.update(struct.pack(">BIII", tag, level, rnd, width_bytes))
        mac.update(int(pos).to_bytes(width_bytes, "big"))
        return int.from_bytes(mac.finalize(), "big")

    def stream(self, tag: int, level: int, rnd: int, nbits: int) -> int:
        """``nbits`` keystream bits for the (tag, level, round) triple."""
        nonce = struct.pack(">BIII", tag, level, rnd, 0) + b"\x00\x00\x00"
        enc = Cipher(self._aes, modes.CTR(nonce)).encryptor()
        nbytes = (nbits + 7) // 8
        data = enc.update(bytes(nbytes)) + enc.finalize()
        return int.from_bytes(data, "big") >> (8 * nbytes - nbits)

    def uniform(self, tag: int, level: int, rnd: int, modulus: int) -> int:
        """Nearly uniform value below ``modulus`` (64 surplus bits, bias < 2**-64)."""
        return self.stream(tag, level, rnd, int(modulus).bit_length() + 64) % modulus

    def bit(self, tag: int, level: int, rnd: int, pos: int, domain: int) -> int:
        """One coin for ``pos`` in a domain of size ``domain``; the encoding depends on the domain only."""
        if domain <= NARROW_LIMIT:
            return self.narrow(tag, level, rnd, pos) & 1
        return self.wide(tag, level, rnd, pos, (int(domain - 1).bit_length() + 7) // 8) & 1

    def bit_batch(self, tag: int, level: int, rnd: int, pos: np.ndarray) -> np.ndarray:
        return (self.narrow_batch(tag, level, rnd, pos) & np.uint64(1)).astype(np.int64)
