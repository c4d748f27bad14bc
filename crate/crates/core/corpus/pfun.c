static int counter;
void foo(void) { counter++; }
void (*p_fun)(void);
void set_function(void) { p_fun = foo; }
void call_function(void) {
    if(p_fun) p_fun();
}
