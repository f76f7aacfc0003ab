/**
 * In-flight request supersession. Each call is keyed on the canonical
 * digest of its request body; issuing a new key aborts the previous fetch
 * and any response whose key no longer matches the latest is dropped, so
 * a stale slider position can never overwrite a newer readout.
 */
export class RequestGate {
  private key: string | undefined;
  private controller: AbortController | undefined;

  /** Key of the most recently issued request (for tests/devtools). */
  currentKey(): string | undefined {
    return this.key;
  }

  async run<T>(
    key: string,
    issue: (signal: AbortSignal) => Promise<T>,
  ): Promise<T | null> {
    if (this.controller !== undefined && this.key !== key) {
      this.controller.abort();
    }
    const controller = new AbortController();
    this.key = key;
    this.controller = controller;
    try {
      const value = await issue(controller.signal);
      return this.key === key ? value : null;
    } catch (err) {
      if (controller.signal.aborted || isAbortError(err)) return null;
      throw err;
    }
  }

  abort(): void {
    this.controller?.abort();
    this.controller = undefined;
    this.key = undefined;
  }
}

function isAbortError(err: unknown): boolean {
  return err instanceof DOMException
    ? err.name === "AbortError"
    : err instanceof Error && err.name === "AbortError";
}
