/** Display formatting for server-computed numbers. Formatting only: the
 * values themselves always arrive from the service.
 */

/** P values, taints, and error bounds: three decimals. */
export function formatStat(x: number): string {
  return x.toFixed(3);
}

/** Expected batch counts: one decimal, e.g. 34.3. */
export function formatBatches(x: number): string {
  return x.toFixed(1);
}

/** Ballot and vote workloads: one decimal with thousands grouping. */
export function formatVolume(x: number): string {
  const [whole, frac] = x.toFixed(1).split(".");
  return whole.replace(/\B(?=(\d{3})+(?!\d))/g, ",") + "." + frac;
}
