/**
 * SplitMix64, word-for-word compatible with the referee's generator.
 *
 * All arithmetic is BigInt mod 2^64.  Stream discipline (same as the
 * referee documents): one word per uniform float, computed as
 * (word >> 11) * 2^-53; one word per settings pair, bit 63 is x and
 * bit 62 is y; independent sub-streams come from deriveSeed, never from
 * reusing a stream at an offset.
 */

export const MASK64 = (1n << 64n) - 1n;
export const GOLDEN = 0x9e3779b97f4a7c15n;

export function mix64(z: bigint): bigint {
  z &= MASK64;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return z ^ (z >> 31n);
}

/** Seed for the index-th independent sub-stream of seed. */
export function deriveSeed(seed: bigint, index: number): bigint {
  if (!Number.isInteger(index) || index < 0) {
    throw new RangeError("index must be a nonnegative integer");
  }
  const salt = mix64(((BigInt(index) + 1n) * GOLDEN) & MASK64);
  return mix64((seed + salt) & MASK64);
}

export class Rng {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  nextU64(): bigint {
    this.state = (this.state + GOLDEN) & MASK64;
    return mix64(this.state);
  }

  /** Uniform in [0, 1), 53 bits, one word consumed. */
  nextFloat(): number {
    // the 53-bit integer is exactly representable, the power-of-two
    // scale is exact, so this bit-matches the reference float stream
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }
}
