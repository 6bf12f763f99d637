import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { Poller } from "../src/poller.js";

describe("poller", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("polls immediately and then on the interval", async () => {
    let calls = 0;
    const poller = new Poller(
      async () => ++calls,
      () => {},
    );
    poller.start(1000);
    await vi.advanceTimersByTimeAsync(1);
    expect(calls).toBe(1);
    await vi.advanceTimersByTimeAsync(3000);
    expect(calls).toBe(4);
    poller.stop();
    await vi.advanceTimersByTimeAsync(5000);
    expect(calls).toBe(4);
  });

  it("drops responses from stale generations (last write wins)", async () => {
    const seen: number[] = [];
    let resolveSlow: ((v: number) => void) | null = null;
    let counter = 0;
    const poller = new Poller<number>(
      () => {
        counter += 1;
        if (counter === 1) {
          return new Promise((resolve) => {
            resolveSlow = resolve;
          });
        }
        return Promise.resolve(counter);
      },
      (v) => seen.push(v),
    );
    void poller.pollOnce(); // slow request, generation 1
    void poller.pollOnce(); // fast request, generation 2
    await vi.advanceTimersByTimeAsync(1);
    resolveSlow!(111); // stale result arrives late
    await vi.advanceTimersByTimeAsync(1);
    expect(seen).toEqual([2]); // only the latest generation landed
  });

  it("routes failures to the error handler", async () => {
    const errors: unknown[] = [];
    const poller = new Poller(
      () => Promise.reject(new Error("down")),
      () => {},
      (err) => errors.push(err),
    );
    await poller.pollOnce();
    expect(errors).toHaveLength(1);
  });
});
