// Label form model. Mirrors the store-side invariant: a rejected
// candidate cannot carry categories, so category selection is disabled
// (and cleared) whenever the decision is "reject".

import type { LabelForm } from "./types.js";

export class LabelFormModel {
  confirmed: boolean | null = null;
  categories = new Set<string>();
  note = "";

  setDecision(confirmed: boolean): void {
    this.confirmed = confirmed;
    if (!confirmed) this.categories.clear();
  }

  get categoriesEnabled(): boolean {
    return this.confirmed !== false;
  }

  /** Toggle a category; returns false when selection is disabled. */
  toggleCategory(category: string): boolean {
    if (!this.categoriesEnabled) return false;
    if (this.categories.has(category)) {
      this.categories.delete(category);
    } else {
      this.categories.add(category);
    }
    return true;
  }

  get valid(): boolean {
    return this.confirmed !== null;
  }

  reset(): void {
    this.confirmed = null;
    this.categories.clear();
    this.note = "";
  }

  build(reviewerId: string): LabelForm {
    if (this.confirmed === null) {
      throw new Error("decision required before submitting");
    }
    return {
      reviewer_id: reviewerId,
      confirmed: this.confirmed,
      categories: [...this.categories].sort(),
      note: this.note,
    };
  }
}
