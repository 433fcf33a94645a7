/* tslint:disable */
/* eslint-disable */

export class MemoryResult {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    converged(): boolean;
    indicator(): number;
    iterations(): number;
    residuals(): Float64Array;
    trajectory(): Float64Array;
    u0(): Float64Array;
    uT(): Float64Array;
    v(): Float64Array;
    x(): Float64Array;
}

/**
 * Layout `[x…, v…, exact…, err_l2]`.
 */
export function fractionalPoisson(s: number, n: number): Float64Array;

/**
 * Layout `[r…, r²ν…, mass]`.
 */
export function kernelProfile(s: number, eps: number, samples: number): Float64Array;

export function memorySolve(c: number, horizon: number, n: number, steps: number): MemoryResult;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_memoryresult_free: (a: number, b: number) => void;
    readonly fractionalPoisson: (a: number, b: number) => [number, number, number, number];
    readonly kernelProfile: (a: number, b: number, c: number) => [number, number, number, number];
    readonly memorySolve: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly memoryresult_converged: (a: number) => number;
    readonly memoryresult_indicator: (a: number) => number;
    readonly memoryresult_iterations: (a: number) => number;
    readonly memoryresult_residuals: (a: number) => [number, number];
    readonly memoryresult_trajectory: (a: number) => [number, number];
    readonly memoryresult_u0: (a: number) => [number, number];
    readonly memoryresult_uT: (a: number) => [number, number];
    readonly memoryresult_v: (a: number) => [number, number];
    readonly memoryresult_x: (a: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
