// Persistent performance banner: running gold accuracy, tier, and the
// next consequence. Shown from the first page load ("no rating yet")
// and refreshed exactly once per submit round-trip.

import { BannerPayload } from "./types.js";

export interface BannerViewModel {
  text: string;
  tierLabel: string;
  cssClass: "banner-none" | "banner-a" | "banner-b" | "banner-standard" | "banner-risk";
}

export const NO_RATING: BannerPayload = {
  has_rating: false,
  running_avg: 0,
  tier: null,
  message: "No quality rating yet",
};

export function bannerViewModel(banner: BannerPayload): BannerViewModel {
  if (!banner.has_rating) {
    return { text: "No quality rating yet", tierLabel: "unrated", cssClass: "banner-none" };
  }
  const tier = banner.tier ?? "Standard";
  const cssClass =
    tier === "A"
      ? "banner-a"
      : tier === "B"
        ? "banner-b"
        : tier === "AtRisk"
          ? "banner-risk"
          : "banner-standard";
  return {
    text: `Average accuracy ${banner.running_avg.toFixed(1)}% — ${banner.message}`,
    tierLabel: tier,
    cssClass,
  };
}
