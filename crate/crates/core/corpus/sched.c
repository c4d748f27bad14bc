/* Scheduler model with the octrng(4) driver and timer folded into the same
 * unit: the translator handles one preprocessed file at a time. */

static const unsigned int MAX_QUEUE = 8;
static const unsigned int TIMEOUT = 100;

static const unsigned long OCTRNG_CONTROL_ADDR = 0x0001180040000000UL;
static const unsigned long OCTRNG_ENTROPY_REG = 0;
static const unsigned int OCTRNG_ENABLE_OUTPUT = 1 << 1;
static const unsigned int OCTRNG_ENABLE_ENTROPY = 1 << 0;

struct octrng_regs {
    unsigned long control_addr;
};

struct task {
    unsigned int timeout;
    unsigned int start;
    void (*timeout_fun)(void);
};

static struct octrng_regs rng_regs;
static unsigned int timer;
static int rand_value;

static struct task tasks[MAX_QUEUE];
static unsigned int running_tasks;
static unsigned int current_tasks;

int add_task(void (*fun)(void), unsigned int timeout)
{
    int result;

    if (running_tasks >= MAX_QUEUE) {
        result = -1;
    } else {
        tasks[current_tasks % MAX_QUEUE].timeout = timeout;
        tasks[current_tasks % MAX_QUEUE].start = timer;
        tasks[current_tasks % MAX_QUEUE].timeout_fun = fun;
        current_tasks = (current_tasks + 1) % MAX_QUEUE;
        running_tasks++;
        result = 0;
    }
    return result;
}

unsigned int get_register(unsigned long addr)
{
    unsigned int value;

    if (addr == OCTRNG_CONTROL_ADDR) {
        value = (unsigned int)rng_regs.control_addr;
    } else if (addr == OCTRNG_ENTROPY_REG
               && (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0
               && (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0) {
        /* no entropy source: the timer stands in for the random value */
        value = timer;
    } else {
        value = 0;
    }
    return value;
}

void set_register(unsigned long addr, unsigned long value)
{
    if (addr == OCTRNG_CONTROL_ADDR) {
        rng_regs.control_addr = value;
    }
}

void octrng_rnd(void);

/*@ requires true;
    ensures (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0;
    ensures (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0; @*/
void octrng_attach(void)
{
    unsigned long control_reg;

    control_reg = get_register(OCTRNG_CONTROL_ADDR);
    control_reg |= OCTRNG_ENABLE_OUTPUT;
    control_reg |= OCTRNG_ENABLE_ENTROPY;
    set_register(OCTRNG_CONTROL_ADDR, control_reg);

    add_task(octrng_rnd, 5);
}

/*@ total;
    requires timer == a;
    requires running_tasks < MAX_QUEUE;
    requires current_tasks < MAX_QUEUE;
    requires (rng_regs.control_addr & OCTRNG_ENABLE_OUTPUT) != 0;
    requires (rng_regs.control_addr & OCTRNG_ENABLE_ENTROPY) != 0;
    ensures rand_value == a; @*/
void octrng_rnd(void)
{
    unsigned int value;
    rand_value = get_register(OCTRNG_ENTROPY_REG);
    add_task(octrng_rnd, 10);
}

/*@ spec idle_increases;
    total;
    requires timer == a;
    ensures timer == a + 1; @*/
void idle(void)
{
    timer = timer + 1;
}

/* Calls through the task function pointers, so it cannot be translated
 * for verification; callers rely on its contract instead. */
/** DONT_TRANSLATE */
/*@ total;
    ensures timer == \old(timer); @*/
void run_tasks(void)
{
    unsigned int i;
    void (*fun)(void);

    for (i = 0; i < MAX_QUEUE; i++) {
        if (tasks[i].timeout_fun != 0 && timer - tasks[i].start >= tasks[i].timeout) {
            fun = tasks[i].timeout_fun;
            tasks[i].timeout_fun = 0;
            running_tasks--;
            fun();
        }
    }
}

/*@ spec main_function;
    total;
    requires timer == 0 && running_tasks == 0;
    ensures timer == TIMEOUT; @*/
int main(void)
{
    octrng_attach();

    /*@ invariant 0 <= timer && timer <= TIMEOUT;
        measure TIMEOUT - timer; @*/
    while (timer < TIMEOUT) {
        run_tasks();
        idle();
    }
    return 0;
}
