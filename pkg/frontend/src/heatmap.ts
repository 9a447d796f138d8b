// Fixed two-color contribution scale: the same contribution always maps to
// the same color, in every title, so identical words are visually
// comparable across drafts. 0 is cold, 1 is hot, 0.5 is neutral white.

interface Rgb { r: number; g: number; b: number }

export const COLOR_COLD: Rgb = { r: 59, g: 102, b: 204 }
export const COLOR_HOT: Rgb = { r: 214, g: 69, b: 48 }
const NEUTRAL: Rgb = { r: 255, g: 255, b: 255 }

function lerp(a: Rgb, b: Rgb, t: number): Rgb {
    return {
        r: Math.round(a.r + (b.r - a.r) * t),
        g: Math.round(a.g + (b.g - a.g) * t),
        b: Math.round(a.b + (b.b - a.b) * t),
    }
}

export function contributionColor(contribution: number): string {
    const c = Math.min(1, Math.max(0, contribution))
    const rgb = c <= 0.5
        ? lerp(COLOR_COLD, NEUTRAL, c / 0.5)
        : lerp(NEUTRAL, COLOR_HOT, (c - 0.5) / 0.5)
    return `rgb(${rgb.r}, ${rgb.g}, ${rgb.b})`
}
