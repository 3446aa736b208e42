export class Eigenstate {
    static __wrap(ptr) {
        const obj = Object.create(Eigenstate.prototype);
        obj.__wbg_ptr = ptr;
        EigenstateFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        EigenstateFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_eigenstate_free(ptr, 0);
    }
    /**
     * 1-based site of the largest entry.
     * @returns {number}
     */
    get argmax() {
        const ret = wasm.eigenstate_argmax(this.__wbg_ptr);
        return ret >>> 0;
    }
    /**
     * @returns {number}
     */
    get eigenvalue() {
        const ret = wasm.eigenstate_eigenvalue(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get peakEstimate() {
        const ret = wasm.eigenstate_peakEstimate(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get upperBound() {
        const ret = wasm.eigenstate_upperBound(this.__wbg_ptr);
        return ret;
    }
    /**
     * Unit-sum vector in the original gauge.
     * @returns {Float64Array}
     */
    get vector() {
        const ret = wasm.eigenstate_vector(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) Eigenstate.prototype[Symbol.dispose] = Eigenstate.prototype.free;

/**
 * `lambda[i * gammas.len() + j]` is the leading eigenvalue for `sizes[i]`
 * and `gammas[j]`, with `gammas` log-spaced over `[gamma_min, gamma_max]`.
 */
export class GammaScan {
    static __wrap(ptr) {
        const obj = Object.create(GammaScan.prototype);
        obj.__wbg_ptr = ptr;
        GammaScanFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        GammaScanFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_gammascan_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get gammas() {
        const ret = wasm.gammascan_gammas(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * @returns {Float64Array}
     */
    get lambda() {
        const ret = wasm.gammascan_lambda(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
}
if (Symbol.dispose) GammaScan.prototype[Symbol.dispose] = GammaScan.prototype.free;

export class ReturnSeries {
    static __wrap(ptr) {
        const obj = Object.create(ReturnSeries.prototype);
        obj.__wbg_ptr = ptr;
        ReturnSeriesFinalization.register(obj, obj.__wbg_ptr, obj);
        return obj;
    }
    __destroy_into_raw() {
        const ptr = this.__wbg_ptr;
        this.__wbg_ptr = 0;
        ReturnSeriesFinalization.unregister(this);
        return ptr;
    }
    free() {
        const ptr = this.__destroy_into_raw();
        wasm.__wbg_returnseries_free(ptr, 0);
    }
    /**
     * @returns {Float64Array}
     */
    get asymptote() {
        const ret = wasm.returnseries_asymptote(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * `⟨1|T^t|1⟩` for `t = 0..=steps`.
     * @returns {Float64Array}
     */
    get exact() {
        const ret = wasm.returnseries_exact(this.__wbg_ptr);
        var v1 = getArrayF64FromWasm0(ret[0], ret[1]).slice();
        wasm.__wbindgen_free(ret[0], ret[1] * 8, 8);
        return v1;
    }
    /**
     * NaN when the series is too short to fit.
     * @returns {number}
     */
    get fittedRate() {
        const ret = wasm.returnseries_fittedRate(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get plateau() {
        const ret = wasm.returnseries_plateau(this.__wbg_ptr);
        return ret;
    }
    /**
     * @returns {number}
     */
    get referenceRate() {
        const ret = wasm.returnseries_referenceRate(this.__wbg_ptr);
        return ret;
    }
}
if (Symbol.dispose) ReturnSeries.prototype[Symbol.dispose] = ReturnSeries.prototype.free;

/**
 * @param {number} p
 * @param {Uint32Array} sizes
 * @param {number} gamma_min
 * @param {number} gamma_max
 * @param {number} points
 * @returns {GammaScan}
 */
export function gammaScan(p, sizes, gamma_min, gamma_max, points) {
    const ptr0 = passArray32ToWasm0(sizes, wasm.__wbindgen_malloc);
    const len0 = WASM_VECTOR_LEN;
    const ret = wasm.gammaScan(p, ptr0, len0, gamma_min, gamma_max, points);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return GammaScan.__wrap(ret[0]);
}

/**
 * Leading eigenpair of `P(γ)T(p)` on `l` sites.
 * @param {number} p
 * @param {number} l
 * @param {number} gamma
 * @returns {Eigenstate}
 */
export function leadingEigenstate(p, l, gamma) {
    const ret = wasm.leadingEigenstate(p, l, gamma);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return Eigenstate.__wrap(ret[0]);
}

/**
 * Return probability to the first site with the large-`L` asymptote.
 * @param {number} p
 * @param {number} l
 * @param {number} steps
 * @returns {ReturnSeries}
 */
export function returnProbability(p, l, steps) {
    const ret = wasm.returnProbability(p, l, steps);
    if (ret[2]) {
        throw takeFromExternrefTable0(ret[1]);
    }
    return ReturnSeries.__wrap(ret[0]);
}
function __wbg_get_imports() {
    const import0 = {
        __proto__: null,
        __wbg_Error_30c8987f7c2ed4e2: function(arg0, arg1) {
            const ret = Error(getStringFromWasm0(arg0, arg1));
            return ret;
        },
        __wbg___wbindgen_throw_41e9ee4f547fc59a: function(arg0, arg1) {
            throw new Error(getStringFromWasm0(arg0, arg1));
        },
        __wbindgen_init_externref_table: function() {
            const table = wasm.__wbindgen_externrefs;
            const offset = table.grow(4);
            table.set(0, undefined);
            table.set(offset + 0, undefined);
            table.set(offset + 1, null);
            table.set(offset + 2, true);
            table.set(offset + 3, false);
        },
    };
    return {
        __proto__: null,
        "./ophydro_wasm_bg.js": import0,
    };
}

const EigenstateFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_eigenstate_free(ptr, 1));
const GammaScanFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_gammascan_free(ptr, 1));
const ReturnSeriesFinalization = (typeof FinalizationRegistry === 'undefined')
    ? { register: () => {}, unregister: () => {} }
    : new FinalizationRegistry(ptr => wasm.__wbg_returnseries_free(ptr, 1));

function getArrayF64FromWasm0(ptr, len) {
    ptr = ptr >>> 0;
    return getFloat64ArrayMemory0().subarray(ptr / 8, ptr / 8 + len);
}

let cachedFloat64ArrayMemory0 = null;
function getFloat64ArrayMemory0() {
    if (cachedFloat64ArrayMemory0 === null || cachedFloat64ArrayMemory0.byteLength === 0) {
        cachedFloat64ArrayMemory0 = new Float64Array(wasm.memory.buffer);
    }
    return cachedFloat64ArrayMemory0;
}

function getStringFromWasm0(ptr, len) {
    return decodeText(ptr >>> 0, len);
}

let cachedUint32ArrayMemory0 = null;
function getUint32ArrayMemory0() {
    if (cachedUint32ArrayMemory0 === null || cachedUint32ArrayMemory0.byteLength === 0) {
        cachedUint32ArrayMemory0 = new Uint32Array(wasm.memory.buffer);
    }
    return cachedUint32ArrayMemory0;
}

let cachedUint8ArrayMemory0 = null;
function getUint8ArrayMemory0() {
    if (cachedUint8ArrayMemory0 === null || cachedUint8ArrayMemory0.byteLength === 0) {
        cachedUint8ArrayMemory0 = new Uint8Array(wasm.memory.buffer);
    }
    return cachedUint8ArrayMemory0;
}

function passArray32ToWasm0(arg, malloc) {
    const ptr = malloc(arg.length * 4, 4) >>> 0;
    getUint32ArrayMemory0().set(arg, ptr / 4);
    WASM_VECTOR_LEN = arg.length;
    return ptr;
}

function takeFromExternrefTable0(idx) {
    const value = wasm.__wbindgen_externrefs.get(idx);
    wasm.__externref_table_dealloc(idx);
    return value;
}

let cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
cachedTextDecoder.decode();
const MAX_SAFARI_DECODE_BYTES = 2146435072;
let numBytesDecoded = 0;
function decodeText(ptr, len) {
    numBytesDecoded += len;
    if (numBytesDecoded >= MAX_SAFARI_DECODE_BYTES) {
        cachedTextDecoder = new TextDecoder('utf-8', { ignoreBOM: true, fatal: true });
        cachedTextDecoder.decode();
        numBytesDecoded = len;
    }
    return cachedTextDecoder.decode(getUint8ArrayMemory0().subarray(ptr, ptr + len));
}

let WASM_VECTOR_LEN = 0;

let wasmModule, wasmInstance, wasm;
function __wbg_finalize_init(instance, module) {
    wasmInstance = instance;
    wasm = instance.exports;
    wasmModule = module;
    cachedFloat64ArrayMemory0 = null;
    cachedUint32ArrayMemory0 = null;
    cachedUint8ArrayMemory0 = null;
    wasm.__wbindgen_start();
    return wasm;
}

async function __wbg_load(module, imports) {
    if (typeof Response === 'function' && module instanceof Response) {
        if (!module.ok) {
            throw new Error(`failed to fetch Wasm: ${module.status} ${module.statusText} fetching '${module.url}'`);
        }

        if (typeof WebAssembly.instantiateStreaming === 'function') {
            try {
                return await WebAssembly.instantiateStreaming(module, imports);
            } catch (e) {
                const validResponse = expectedResponseType(module.type);

                if (validResponse && module.headers.get('Content-Type') !== 'application/wasm') {
                    console.warn("`WebAssembly.instantiateStreaming` failed because your server does not serve Wasm with `application/wasm` MIME type. Falling back to `WebAssembly.instantiate` which is slower. Original error:\n", e);

                } else { throw e; }
            }
        }

        const bytes = await module.arrayBuffer();
        return await WebAssembly.instantiate(bytes, imports);
    } else {
        const instance = await WebAssembly.instantiate(module, imports);

        if (instance instanceof WebAssembly.Instance) {
            return { instance, module };
        } else {
            return instance;
        }
    }

    function expectedResponseType(type) {
        switch (type) {
            case 'basic': case 'cors': case 'default': return true;
        }
        return false;
    }
}

function initSync(module) {
    if (wasm !== undefined) return wasm;


    if (module !== undefined) {
        if (Object.getPrototypeOf(module) === Object.prototype) {
            ({module} = module)
        } else {
            console.warn('using deprecated parameters for `initSync()`; pass a single object instead')
        }
    }

    const imports = __wbg_get_imports();
    if (!(module instanceof WebAssembly.Module)) {
        module = new WebAssembly.Module(module);
    }
    const instance = new WebAssembly.Instance(module, imports);
    return __wbg_finalize_init(instance, module);
}

async function __wbg_init(module_or_path) {
    if (wasm !== undefined) return wasm;


    if (module_or_path !== undefined) {
        if (Object.getPrototypeOf(module_or_path) === Object.prototype) {
            ({module_or_path} = module_or_path)
        } else {
            console.warn('using deprecated parameters for the initialization function; pass a single object instead')
        }
    }

    if (module_or_path === undefined) {
        module_or_path = new URL('ophydro_wasm_bg.wasm', import.meta.url);
    }
    const imports = __wbg_get_imports();

    if (typeof module_or_path === 'string' || (typeof Request === 'function' && module_or_path instanceof Request) || (typeof URL === 'function' && module_or_path instanceof URL)) {
        module_or_path = fetch(module_or_path);
    }

    const { instance, module } = await __wbg_load(await module_or_path, imports);

    return __wbg_finalize_init(instance, module);
}

export { initSync, __wbg_init as default };
