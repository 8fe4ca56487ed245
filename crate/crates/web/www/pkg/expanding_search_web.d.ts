/* tslint:disable */
/* eslint-disable */

/**
 * Quadtree, portals and the portal-respecting segmented optimum for one
 * shift. Coordinates are in input units.
 */
export function portal_view(instance_json: string, epsilon: number, shift_x: number, shift_y: number, kappa: number): string;

/**
 * Decomposition with the derandomized shift, plus the exact optimum when
 * the instance is small enough.
 */
export function solve_points(instance_json: string, epsilon: number): string;

/**
 * Builds the gadget, explores it copy by copy in round robin, structures
 * that pattern and extracts the per-copy Steiner trees.
 */
export function structure_gadget(st12_json: string, copies: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly portal_view: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number];
    readonly solve_points: (a: number, b: number, c: number) => [number, number];
    readonly structure_gadget: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
