#!/usr/bin/env python3
"""Independent FNV-1a 64 / character n-gram oracle for featurize().

Frames the text with U+0002 ... U+0003, hashes the UTF-8 bytes of every
n-gram for n in [3, 5] and reduces mod 2**16. Prints sorted bucket lists.
"""

def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def buckets(text, nmin=3, nmax=5, b=1 << 16):
    marked = "\u0002" + text + "\u0003"
    out = []
    for n in range(nmin, nmax + 1):
        for i in range(len(marked) - n + 1):
            out.append(fnv1a64(marked[i:i + n].encode("utf-8")) % b)
    return sorted(out)


if __name__ == "__main__":
    for s in ["اب", "رائع", "hotel"]:
        print(repr(s), buckets(s))
    print("fnv('a')", hex(fnv1a64(b"a")), "fnv('')", hex(fnv1a64(b"")))
