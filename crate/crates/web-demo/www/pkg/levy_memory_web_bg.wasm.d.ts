/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_memoryresult_free: (a: number, b: number) => void;
export const fractionalPoisson: (a: number, b: number) => [number, number, number, number];
export const kernelProfile: (a: number, b: number, c: number) => [number, number, number, number];
export const memorySolve: (a: number, b: number, c: number, d: number) => [number, number, number];
export const memoryresult_converged: (a: number) => number;
export const memoryresult_indicator: (a: number) => number;
export const memoryresult_iterations: (a: number) => number;
export const memoryresult_residuals: (a: number) => [number, number];
export const memoryresult_trajectory: (a: number) => [number, number];
export const memoryresult_u0: (a: number) => [number, number];
export const memoryresult_uT: (a: number) => [number, number];
export const memoryresult_v: (a: number) => [number, number];
export const memoryresult_x: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
