// Minimal typings for the jsdom surface the suites use; the jsdom package
// ships no type declarations of its own.
declare module "jsdom" {
  export interface DOMWindow extends Window {
    document: Document;
    localStorage: Storage;
  }

  export interface ConstructorOptions {
    url?: string;
    referrer?: string;
    contentType?: string;
  }

  export class JSDOM {
    constructor(html?: string, options?: ConstructorOptions);
    readonly window: DOMWindow;
    serialize(): string;
  }
}
