/* tslint:disable */
/* eslint-disable */

/**
 * `Q(s)` on a grid, the minimizer, and `P_e(n)` against the bound for `n = 1..=n_max`.
 */
export function chernoffCurve(rho_x: number, rho_y: number, rho_z: number, sigma_x: number, sigma_y: number, sigma_z: number, prior: number, n_max: number, points: number): any;

/**
 * Structural equality test for the main inequality.
 */
export function equalityCertificate(eta_mass: number, eta_x: number, eta_y: number, eta_z: number, phi_mass: number, phi_x: number, phi_y: number, phi_z: number): any;

/**
 * `F_s(η, φ)` on `points` equally spaced `s` with both lower bounds.
 */
export function overlapSweep(eta_mass: number, eta_x: number, eta_y: number, eta_z: number, phi_mass: number, phi_x: number, phi_y: number, phi_z: number, points: number): any;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly chernoffCurve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly equalityCertificate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
    readonly overlapSweep: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
