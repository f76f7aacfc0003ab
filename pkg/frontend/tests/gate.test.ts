import { describe, expect, it } from "vitest";

import { RequestGate } from "../src/lib/gate";

function deferred<T>(): { promise: Promise<T>; resolve: (v: T) => void } {
  let resolve!: (v: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

describe("RequestGate", () => {
  it("returns the value when the key is still current", async () => {
    const gate = new RequestGate();
    const value = await gate.run("k1", async () => 42);
    expect(value).toBe(42);
  });

  it("aborts the previous in-flight request when the key changes", async () => {
    const gate = new RequestGate();
    let firstSignal: AbortSignal | undefined;
    const first = deferred<number>();
    const p1 = gate.run("old", (signal) => {
      firstSignal = signal;
      return first.promise;
    });
    const p2 = gate.run("new", async () => 2);
    expect(firstSignal?.aborted).toBe(true);
    first.resolve(1);
    expect(await p1).toBeNull();
    expect(await p2).toBe(2);
  });

  it("drops a stale resolution instead of applying it", async () => {
    const gate = new RequestGate();
    const slow = deferred<string>();
    const p1 = gate.run("a", () => slow.promise);
    const p2 = gate.run("b", async () => "fresh");
    expect(await p2).toBe("fresh");
    slow.resolve("stale");
    expect(await p1).toBeNull();
  });

  it("swallow AbortError from fetch as a null result", async () => {
    const gate = new RequestGate();
    const err = new DOMException("The operation was aborted.", "AbortError");
    const p1 = gate.run("a", () => Promise.reject(err));
    expect(await p1).toBeNull();
  });

  it("propagates real failures", async () => {
    const gate = new RequestGate();
    await expect(gate.run("a", () => Promise.reject(new Error("boom")))).rejects.toThrow("boom");
  });

  it("tracks the current key", async () => {
    const gate = new RequestGate();
    await gate.run("k", async () => 1);
    expect(gate.currentKey()).toBe("k");
    gate.abort();
    expect(gate.currentKey()).toBeUndefined();
  });
});
