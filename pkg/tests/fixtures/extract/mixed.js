const url = `https://example.com // inside template`;
// top level note
/** Exported helper. */
export function f(x) {
  const s = 'single // quoted';
  return x; /* tail block */
}
