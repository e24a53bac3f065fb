/* tslint:disable */
/* eslint-disable */

export class Simulation {
    free(): void;
    [Symbol.dispose](): void;
    advance(steps: number): void;
    density(): Float64Array;
    dt(): number;
    mass(): number;
    n(): number;
    /**
     * `phi` may be `undefined` for the stable choice.
     */
    constructor(scenario: string, n: number, epsilon: number, phi?: number | null);
    phi(): number;
    time(): number;
}

export function apCut(n: number, epsilon: number, t_final: number): Float64Array;

export function radiusCurve(epsilon: number, h: number, sigma_s: number, sigma_a: number, phi_max: boolean, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_simulation_free: (a: number, b: number) => void;
    readonly apCut: (a: number, b: number, c: number) => [number, number, number, number];
    readonly radiusCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly simulation_advance: (a: number, b: number) => [number, number];
    readonly simulation_density: (a: number) => [number, number];
    readonly simulation_dt: (a: number) => number;
    readonly simulation_mass: (a: number) => number;
    readonly simulation_n: (a: number) => number;
    readonly simulation_new: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly simulation_phi: (a: number) => number;
    readonly simulation_time: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
